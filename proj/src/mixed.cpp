#include "covkl/mixed.hpp"

#include "covkl/error.hpp"
#include "covkl/kld.hpp"

#include <cmath>
#include <map>
#include <unordered_map>

namespace covkl {
namespace {

void require_same_schema(const Dataset& x, const Dataset& y) {
  if (!(x.schema() == y.schema()))
    throw ConfigError("x and y must share the same schema (names, kinds and order)");
}

void require_complete(const Dataset& ds, const char* which) {
  if (ds.has_missing())
    throw ConfigError(std::string("sample ") + which +
                      " has missing cells; estimation needs complete observations");
}

PointMatrix continuous_rows(const Dataset& ds, const std::vector<std::size_t>& rows) {
  PointMatrix out(static_cast<Eigen::Index>(rows.size()), ds.continuous().cols());
  for (std::size_t r = 0; r < rows.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = ds.continuous().row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

} // namespace

Stratification stratify(const Dataset& x, const Dataset& y) {
  require_same_schema(x, y);
  const Schema& schema = x.schema();
  const auto d_d = schema.n_discrete();
  for (std::size_t c = 0; c < d_d; ++c) {
    const auto col = static_cast<Eigen::Index>(schema.discrete_column(c));
    if (x.missing().col(col).any() || y.missing().col(col).any())
      throw ConfigError("discrete column '" + schema[static_cast<std::size_t>(col)].name +
                        "' has missing cells");
  }

  // y code -> x code per discrete column, -1 when the label never occurs in x
  std::vector<std::vector<int>> y_to_x(d_d);
  for (std::size_t b = 0; b < d_d; ++b) {
    std::unordered_map<std::string, int> xcode;
    for (std::size_t c = 0; c < x.labels()[b].size(); ++c)
      xcode[x.labels()[b][c]] = static_cast<int>(c);
    for (const auto& lab : y.labels()[b]) {
      auto it = xcode.find(lab);
      y_to_x[b].push_back(it == xcode.end() ? -1 : it->second);
    }
  }

  Stratification s;
  s.n = x.n_rows();
  s.m = y.n_rows();
  std::map<std::vector<int>, std::size_t> position;
  std::vector<int> key(d_d);
  for (std::size_t i = 0; i < x.n_rows(); ++i) {
    for (std::size_t b = 0; b < d_d; ++b) key[b] = x.discrete()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b));
    auto [it, inserted] = position.try_emplace(key, s.strata.size());
    if (inserted) {
      Stratification::Stratum st;
      st.key = key;
      for (std::size_t b = 0; b < d_d; ++b) {
        if (b) st.label += ',';
        st.label += schema[schema.discrete_column(b)].name + "=" +
                    x.labels()[b][static_cast<std::size_t>(key[b])];
      }
      s.strata.push_back(std::move(st));
    }
    s.strata[it->second].x_rows.push_back(i);
  }
  for (std::size_t i = 0; i < y.n_rows(); ++i) {
    bool known = true;
    for (std::size_t b = 0; b < d_d; ++b) {
      const int yc = y.discrete()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b));
      key[b] = y_to_x[b][static_cast<std::size_t>(yc)];
      known = known && key[b] >= 0;
    }
    if (!known) continue;
    if (auto it = position.find(key); it != position.end()) s.strata[it->second].y_rows.push_back(i);
  }
  for (const auto& st : s.strata) {
    s.p_hat.push_back(static_cast<double>(st.x_rows.size()) / static_cast<double>(s.n));
    s.q_hat.push_back(s.m == 0 ? 0.0
                               : static_cast<double>(st.y_rows.size()) / static_cast<double>(s.m));
  }
  return s;
}

double kld_est_discrete(const std::vector<double>& p_hat, const std::vector<double>& q_hat) {
  if (p_hat.size() != q_hat.size()) throw ConfigError("pmfs have different lengths");
  double sum = 0.0;
  for (std::size_t k = 0; k < p_hat.size(); ++k) {
    if (p_hat[k] < 0.0 || q_hat[k] < 0.0) throw ConfigError("negative probability");
    if (p_hat[k] == 0.0) continue;
    if (q_hat[k] == 0.0)
      throw InfiniteDivergenceError("p has mass on category " + std::to_string(k) +
                                    " where q has none; the divergence is infinite");
    sum += p_hat[k] * std::log(p_hat[k] / q_hat[k]);
  }
  return sum;
}

KlEstimate kld_est_mixed(const Dataset& x, const Dataset& y) {
  require_same_schema(x, y);
  require_complete(x, "x");
  require_complete(y, "y");
  const Schema& schema = x.schema();
  if (schema.n_discrete() == 0) return kld_est_bc(x.continuous(), y.continuous());

  const Stratification s = stratify(x, y);
  for (std::size_t k = 0; k < s.strata.size(); ++k) {
    if (s.strata[k].y_rows.empty())
      throw InfiniteDivergenceError("stratum '" + s.strata[k].label +
                                    "' occurs in x but not in y; the divergence is infinite");
  }
  KlEstimate est;
  est.n = s.n;
  est.m = s.m;
  est.d = schema.n_continuous();
  double continuous_part = 0.0;
  if (schema.n_continuous() > 0) {
    for (std::size_t k = 0; k < s.strata.size(); ++k) {
      const auto& st = s.strata[k];
      if (st.x_rows.size() < 2)
        throw StratumError("stratum '" + st.label + "' has " + std::to_string(st.x_rows.size()) +
                               " row(s) in x; at least 2 are needed",
                           st.label);
      const double part =
          kld_est_bc(continuous_rows(x, st.x_rows), continuous_rows(y, st.y_rows)).value;
      continuous_part += s.p_hat[k] * part;
    }
  }
  est.value = continuous_part + kld_est_discrete(s.p_hat, s.q_hat);
  return est;
}

} // namespace covkl
