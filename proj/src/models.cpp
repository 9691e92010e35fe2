#include "covkl/models.hpp"

#include "covkl/error.hpp"
#include "covkl/rng.hpp"
#include "covkl/stats.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>

namespace covkl {

std::string to_string(ModelKind kind) {
  switch (kind) {
  case ModelKind::gauss_dist: return "GaussDist";
  case ModelKind::indep_cop: return "IndepCop";
  case ModelKind::gauss_cop: return "GaussCop";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
  std::string t;
  for (char c : s) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (t == "gaussdist" || t == "gauss_dist") return ModelKind::gauss_dist;
  if (t == "indepcop" || t == "indep_cop") return ModelKind::indep_cop;
  if (t == "gausscop" || t == "gauss_cop") return ModelKind::gauss_cop;
  throw ConfigError("unknown model '" + s + "' (expected gaussdist, indepcop or gausscop)");
}

FittedModel::FittedModel(ModelKind kind, Schema schema,
                         std::vector<std::vector<std::string>> labels,
                         std::optional<ContinuousFit> shared, std::optional<DiscreteBlock> discrete)
    : kind_(kind), schema_(std::move(schema)), labels_(std::move(labels)),
      shared_(std::move(shared)), discrete_(std::move(discrete)) {
  if (labels_.size() != schema_.n_discrete())
    throw ConfigError("model label lists do not match the discrete columns");
  if (schema_.n_discrete() > 0 && !discrete_)
    throw ConfigError("model with discrete columns needs a discrete block");
  if (discrete_) {
    double total = 0.0;
    for (double p : discrete_->pmf) total += p;
    if (discrete_->keys.size() != discrete_->pmf.size() || std::abs(total - 1.0) > 1e-9)
      throw ConfigError("discrete pmf must have one entry per key and sum to 1");
    if (!discrete_->per_stratum.empty() && discrete_->per_stratum.size() != discrete_->keys.size())
      throw ConfigError("per-stratum fits must match the discrete keys");
  }
  if (schema_.n_continuous() > 0 && !shared_ && (!discrete_ || discrete_->per_stratum.empty()))
    throw ConfigError("model with continuous columns needs a continuous fit");
}

namespace {

// Available-case mean / pairwise-complete covariance of the continuous block.
void moments(const Dataset& ds, Eigen::VectorXd& mean, Eigen::MatrixXd& cov) {
  const Schema& schema = ds.schema();
  const auto d = static_cast<Eigen::Index>(schema.n_continuous());
  const auto& x = ds.continuous();
  auto observed = [&](std::size_t i, Eigen::Index c) {
    return !ds.is_missing(i, schema.continuous_column(static_cast<std::size_t>(c)));
  };
  mean.resize(d);
  cov.resize(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    double s = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < ds.n_rows(); ++i)
      if (observed(i, a)) {
        s += x(static_cast<Eigen::Index>(i), a);
        ++cnt;
      }
    mean(a) = s / static_cast<double>(cnt);
  }
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = a; b < d; ++b) {
      double ma = 0.0, mb = 0.0;
      std::size_t cnt = 0;
      for (std::size_t i = 0; i < ds.n_rows(); ++i)
        if (observed(i, a) && observed(i, b)) {
          ma += x(static_cast<Eigen::Index>(i), a);
          mb += x(static_cast<Eigen::Index>(i), b);
          ++cnt;
        }
      if (cnt < 2) throw FitError("too few complete pairs to estimate a covariance");
      ma /= static_cast<double>(cnt);
      mb /= static_cast<double>(cnt);
      double s = 0.0;
      for (std::size_t i = 0; i < ds.n_rows(); ++i)
        if (observed(i, a) && observed(i, b))
          s += (x(static_cast<Eigen::Index>(i), a) - ma) * (x(static_cast<Eigen::Index>(i), b) - mb);
      cov(a, b) = cov(b, a) = s / static_cast<double>(cnt - 1);
    }
  }
}

Eigen::MatrixXd floor_eigenvalues(const Eigen::MatrixXd& cov) {
  const double floor = 1e-10 * cov.trace() / static_cast<double>(cov.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.eigenvalues().minCoeff() >= floor) return cov;
  const Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(floor);
  Eigen::MatrixXd out = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

ContinuousFit fit_continuous(const Dataset& ds, ModelKind kind, const FitOptions& options) {
  const Schema& schema = ds.schema();
  if (kind == ModelKind::gauss_dist) {
    if (ds.has_missing() && !options.allow_missing_gauss_dist)
      throw FitError("GaussDist is not fitted on data with missing cells");
    if (ds.n_rows() <= schema.n_continuous())
      throw FitError("GaussDist needs more rows than continuous columns");
    GaussDistFit fit;
    moments(ds, fit.mean, fit.cov);
    if (!(fit.cov.diagonal().array() > 0.0).all()) throw FitError("GaussDist: zero variance column");
    fit.cov = floor_eigenvalues(fit.cov);
    return fit;
  }
  auto margins = fit_margins(ds);
  if (kind == ModelKind::indep_cop) return IndepCopFit{std::move(margins)};
  Eigen::MatrixXd corr = repair_correlation(pairwise_normal_score_correlation(ds, margins));
  return GaussCopFit{std::move(margins), std::move(corr)};
}

// Continuous part only, with discrete columns dropped.
Dataset continuous_part(const Dataset& ds) {
  std::vector<std::string> keep;
  for (const auto& c : ds.schema().columns())
    if (c.kind == ColumnKind::continuous) keep.push_back(c.name);
  return marginalize_columns(ds, keep);
}

} // namespace

Eigen::MatrixXd pairwise_normal_score_correlation(const Dataset& ds,
                                                  const std::vector<MarginModel>& margins) {
  const Schema& schema = ds.schema();
  const PointMatrix u = to_uniform(ds, margins);
  const auto d = u.cols();
  PointMatrix z(u.rows(), d);
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index c = 0; c < d; ++c)
      z(i, c) = std::isnan(u(i, c)) ? u(i, c) : stats::normal_quantile(u(i, c));

  Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = a + 1; b < d; ++b) {
      double sa = 0.0, sb = 0.0;
      std::size_t cnt = 0;
      for (Eigen::Index i = 0; i < z.rows(); ++i)
        if (!std::isnan(z(i, a)) && !std::isnan(z(i, b))) {
          sa += z(i, a);
          sb += z(i, b);
          ++cnt;
        }
      if (cnt < 3)
        throw FitError("columns '" + schema[schema.continuous_column(static_cast<std::size_t>(a))].name +
                       "' and '" + schema[schema.continuous_column(static_cast<std::size_t>(b))].name +
                       "' share fewer than 3 complete pairs");
      const double ma = sa / static_cast<double>(cnt);
      const double mb = sb / static_cast<double>(cnt);
      double sab = 0.0, saa = 0.0, sbb = 0.0;
      for (Eigen::Index i = 0; i < z.rows(); ++i)
        if (!std::isnan(z(i, a)) && !std::isnan(z(i, b))) {
          const double da = z(i, a) - ma;
          const double db = z(i, b) - mb;
          sab += da * db;
          saa += da * da;
          sbb += db * db;
        }
      if (!(saa > 0.0 && sbb > 0.0)) throw FitError("constant normal scores in a column pair");
      corr(a, b) = corr(b, a) = sab / std::sqrt(saa * sbb);
    }
  }
  return corr;
}

Eigen::MatrixXd repair_correlation(const Eigen::MatrixXd& corr, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
  if (eig.eigenvalues().minCoeff() >= floor) return corr;
  const Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(floor);
  Eigen::MatrixXd a = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
  const Eigen::VectorXd scale = a.diagonal().cwiseSqrt().cwiseInverse();
  a = scale.asDiagonal() * a * scale.asDiagonal();
  a = 0.5 * (a + a.transpose());
  a.diagonal().setOnes();
  return a;
}

FittedModel fit_gauss_dist(const Dataset& ds, const FitOptions& options) {
  if (ds.schema().n_discrete() > 0)
    throw FitError("GaussDist only applies to continuous covariates");
  return FittedModel(ModelKind::gauss_dist, ds.schema(), {},
                     fit_continuous(ds, ModelKind::gauss_dist, options), std::nullopt);
}

FittedModel fit_indep_cop(const Dataset& ds, const std::vector<MarginModel>& margins) {
  if (ds.schema().n_discrete() > 0) return fit_model(ds, ModelKind::indep_cop);
  if (margins.size() != ds.schema().n_continuous())
    throw ConfigError("one margin per continuous column is required");
  return FittedModel(ModelKind::indep_cop, ds.schema(), {}, IndepCopFit{margins}, std::nullopt);
}

FittedModel fit_gauss_cop(const Dataset& ds, const std::vector<MarginModel>& margins) {
  if (ds.schema().n_discrete() > 0) return fit_model(ds, ModelKind::gauss_cop);
  Eigen::MatrixXd corr = repair_correlation(pairwise_normal_score_correlation(ds, margins));
  return FittedModel(ModelKind::gauss_cop, ds.schema(), {}, GaussCopFit{margins, std::move(corr)},
                     std::nullopt);
}

FittedModel fit_model(const Dataset& ds, ModelKind kind, const FitOptions& options) {
  const Schema& schema = ds.schema();
  if (kind == ModelKind::gauss_dist) return fit_gauss_dist(ds, options);
  if (schema.n_discrete() == 0)
    return FittedModel(kind, schema, {}, fit_continuous(ds, kind, options), std::nullopt);

  // Discrete block: joint pmf over rows whose discrete tuple is complete.
  const auto d_d = schema.n_discrete();
  std::map<std::vector<int>, std::size_t> position;
  DiscreteBlock block;
  std::vector<std::vector<std::size_t>> rows;
  std::vector<int> key(d_d);
  std::size_t total = 0;
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    bool complete = true;
    for (std::size_t b = 0; b < d_d; ++b) {
      complete = complete && !ds.is_missing(i, schema.discrete_column(b));
      key[b] = ds.discrete()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b));
    }
    if (!complete) continue;
    auto [it, inserted] = position.try_emplace(key, block.keys.size());
    if (inserted) {
      block.keys.push_back(key);
      rows.emplace_back();
    }
    rows[it->second].push_back(i);
    ++total;
  }
  if (total == 0) throw FitError("no row has a complete set of discrete values");
  for (const auto& r : rows) block.pmf.push_back(static_cast<double>(r.size()) / static_cast<double>(total));

  std::optional<ContinuousFit> shared;
  const auto d_c = schema.n_continuous();
  if (d_c > 0) {
    const std::size_t min_rows = std::max<std::size_t>(20, 5 * d_c);
    const bool stratified = std::all_of(rows.begin(), rows.end(),
                                        [&](const auto& r) { return r.size() >= min_rows; });
    const Dataset cont = continuous_part(ds);
    if (stratified) {
      for (const auto& r : rows) block.per_stratum.push_back(fit_continuous(cont.take_rows(r), kind, options));
    } else {
      shared = fit_continuous(cont, kind, options);
    }
  }
  return FittedModel(kind, schema, ds.labels(), std::move(shared), std::move(block));
}

namespace {

// Writes one continuous draw into `out` (length d_c).
void draw_continuous(const ContinuousFit& fit, const Eigen::MatrixXd* chol, rng::Engine& eng,
                     double* out) {
  std::normal_distribution<double> normal;
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GaussDistFit>) {
          const auto d = f.mean.size();
          Eigen::VectorXd z(d);
          for (Eigen::Index j = 0; j < d; ++j) z(j) = normal(eng);
          const Eigen::VectorXd v = f.mean + (*chol) * z;
          for (Eigen::Index j = 0; j < d; ++j) out[j] = v(j);
        } else if constexpr (std::is_same_v<T, IndepCopFit>) {
          for (std::size_t j = 0; j < f.margins.size(); ++j)
            out[j] = f.margins[j].quantile(rng::uniform(eng));
        } else {
          const auto d = f.corr.rows();
          Eigen::VectorXd z(d);
          for (Eigen::Index j = 0; j < d; ++j) z(j) = normal(eng);
          const Eigen::VectorXd v = (*chol) * z;
          for (Eigen::Index j = 0; j < d; ++j) {
            // Phi(v) can round to 0 or 1 far in the tails
            const double u = std::clamp(stats::normal_cdf(v(j)), 1e-300, 1.0 - 0x1.0p-53);
            out[j] = f.margins[static_cast<std::size_t>(j)].quantile(u);
          }
        }
      },
      fit);
}

Eigen::MatrixXd cholesky_factor(const ContinuousFit& fit) {
  const Eigen::MatrixXd* m = nullptr;
  if (auto g = std::get_if<GaussDistFit>(&fit)) m = &g->cov;
  if (auto g = std::get_if<GaussCopFit>(&fit)) m = &g->corr;
  if (!m) return {};
  Eigen::LLT<Eigen::MatrixXd> llt(*m);
  if (llt.info() != Eigen::Success) throw FitError("model covariance is not positive definite");
  return llt.matrixL();
}

} // namespace

Dataset sample_model(const FittedModel& model, std::size_t n_sim, std::uint64_t seed) {
  const Schema& schema = model.schema();
  const auto d_c = schema.n_continuous();
  const auto d_d = schema.n_discrete();
  const auto n = static_cast<Eigen::Index>(n_sim);
  PointMatrix cont(n, static_cast<Eigen::Index>(d_c));
  CodeMatrix disc(n, static_cast<Eigen::Index>(d_d));

  Eigen::MatrixXd shared_chol;
  if (model.shared()) shared_chol = cholesky_factor(*model.shared());
  std::vector<Eigen::MatrixXd> stratum_chol;
  std::vector<double> cumulative;
  if (const auto& block = model.discrete()) {
    for (const auto& f : block->per_stratum) stratum_chol.push_back(cholesky_factor(f));
    double acc = 0.0;
    for (double p : block->pmf) cumulative.push_back(acc += p);
  }

#pragma omp parallel for schedule(dynamic, 64)
  for (Eigen::Index i = 0; i < n; ++i) {
    rng::Engine eng(rng::derive(seed, {static_cast<std::uint64_t>(i)}));
    const ContinuousFit* fit = model.shared() ? &*model.shared() : nullptr;
    const Eigen::MatrixXd* chol = &shared_chol;
    if (const auto& block = model.discrete()) {
      const double u = rng::uniform(eng) * cumulative.back();
      const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                                                  cumulative.size() - 1);
      for (std::size_t b = 0; b < d_d; ++b) disc(i, static_cast<Eigen::Index>(b)) = block->keys[k][b];
      if (!block->per_stratum.empty()) {
        fit = &block->per_stratum[k];
        chol = &stratum_chol[k];
      }
    }
    if (d_c > 0) draw_continuous(*fit, chol, eng, cont.data() + static_cast<std::size_t>(i) * d_c);
  }
  return Dataset(schema, std::move(cont), std::move(disc),
                 MaskMatrix::Constant(n, static_cast<Eigen::Index>(schema.size()), false),
                 model.labels());
}

} // namespace covkl
