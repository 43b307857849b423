#include "cpd/estimator.hpp"

#include <stdexcept>

namespace cpd {

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::KernelRulsif: return "kernel-rulsif";
    case EstimatorKind::GbdtRulsif: return "gbdt-rulsif";
    case EstimatorKind::NnRulsif: return "nn-rulsif";
    case EstimatorKind::GbdtClassifier: return "gbdt-classifier";
    case EstimatorKind::NnClassifier: return "nn-classifier";
  }
  throw std::invalid_argument("to_string: unknown estimator kind");
}

EstimatorKind parse_estimator(const std::string& name) {
  for (EstimatorKind kind : kAllEstimators)
    if (to_string(kind) == name) return kind;
  throw std::invalid_argument("unknown estimator '" + name +
                              "' (expected kernel-rulsif, gbdt-rulsif, nn-rulsif, "
                              "gbdt-classifier, or nn-classifier)");
}

bool is_classifier(EstimatorKind kind) {
  return kind == EstimatorKind::GbdtClassifier || kind == EstimatorKind::NnClassifier;
}

ScoreKind natural_score(EstimatorKind kind) {
  return is_classifier(kind) ? ScoreKind::KlSymmetric : ScoreKind::PearsonSymmetric;
}

Vector FittedModel::predict_ratio(MatrixRef rows, double clip_eps) const {
  if (const auto* kernel = std::get_if<KernelModel>(&model)) return predict(*kernel, rows);
  if (const auto* ensemble = std::get_if<BoostedEnsemble>(&model)) {
    const Vector out = predict_ensemble(*ensemble, rows);
    return ensemble->kind == EnsembleKind::Classifier ? ratio_from_proba(out, clip_eps) : out;
  }
  const auto& net = std::get<Mlp>(model);
  const Vector out = predict_mlp(net, rows);
  return net.output == OutputKind::Sigmoid ? ratio_from_proba(out, clip_eps) : out;
}

Vector FittedModel::predict_proba(MatrixRef rows) const {
  if (const auto* kernel = std::get_if<KernelModel>(&model))
    return proba_from_ratio(predict(*kernel, rows));
  if (const auto* ensemble = std::get_if<BoostedEnsemble>(&model)) {
    const Vector out = predict_ensemble(*ensemble, rows);
    return ensemble->kind == EnsembleKind::Classifier ? out : proba_from_ratio(out);
  }
  const auto& net = std::get<Mlp>(model);
  const Vector out = predict_mlp(net, rows);
  return net.output == OutputKind::Sigmoid ? out : proba_from_ratio(out);
}

KernelChoice select_kernel_width(const EstimatorConfig& cfg, MatrixRef ref_rows,
                                 MatrixRef test_rows, std::uint64_t seed) {
  const auto [sigma, lambda] =
      cross_validate(ref_rows, test_rows, cfg.cv_grid, cfg.alpha, cfg.kernel_centers, seed);
  return {sigma, lambda};
}

FittedModel fit_estimator(EstimatorKind kind, const EstimatorConfig& cfg, MatrixRef ref_rows,
                          MatrixRef test_rows, std::uint64_t seed,
                          const std::optional<KernelChoice>& kernel) {
  FittedModel fitted;
  fitted.kind = kind;
  switch (kind) {
    case EstimatorKind::KernelRulsif: {
      const KernelChoice choice =
          kernel ? *kernel : select_kernel_width(cfg, ref_rows, test_rows, seed);
      fitted.model = fit_closed_form(ref_rows, test_rows, choice.sigma, choice.lambda, cfg.alpha,
                                     cfg.kernel_centers, seed);
      break;
    }
    case EstimatorKind::GbdtRulsif: {
      BoostOptions opts = cfg.gbdt_ratio;
      opts.alpha = cfg.alpha;
      fitted.model = fit_gbdt_rulsif(ref_rows, test_rows, opts, seed);
      break;
    }
    case EstimatorKind::NnRulsif:
      fitted.model =
          fit_nn_rulsif(ref_rows, test_rows, cfg.nn_hidden, cfg.alpha, cfg.adam, seed);
      break;
    case EstimatorKind::GbdtClassifier:
      fitted.model = fit_gbdt_classifier(ref_rows, test_rows, cfg.gbdt_classifier, seed);
      break;
    case EstimatorKind::NnClassifier:
      fitted.model = fit_nn_classifier(ref_rows, test_rows, cfg.nn_hidden, cfg.adam, seed);
      break;
  }
  return fitted;
}

}  // namespace cpd
