#include "sbm/transport.hpp"

#include "sbm/ot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace sbm::transport {

IntVector knn_transfer(const Matrix& X_query, const Matrix& X_dst, const IntVector& votes_dst, int k) {
  const Eigen::Index n_dst = X_dst.rows();
  if (n_dst == 0) throw InputError("knn_transfer: destination set is empty");
  if (votes_dst.size() != n_dst) throw InputError("knn_transfer: destination votes do not match destination rows");
  if (k < 1 || k > n_dst) {
    std::ostringstream msg;
    msg << "knn_transfer: k = " << k << " outside [1, " << n_dst << "]";
    throw InputError(msg.str());
  }
  if (X_query.cols() != X_dst.cols()) throw InputError("knn_transfer: query and destination dimensions differ");

  IntVector out(X_query.rows());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_dst));
  Vector dist(n_dst);
  const auto kk = static_cast<std::ptrdiff_t>(k);
  for (Eigen::Index q = 0; q < X_query.rows(); ++q) {
    dist = (X_dst.rowwise() - X_query.row(q)).rowwise().squaredNorm();
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto closer = [&](Eigen::Index a, Eigen::Index b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
    std::partial_sort(order.begin(), order.begin() + kk, order.end(), closer);

    int sum = 0;
    int nearest_vote = kAbstain;
    for (std::ptrdiff_t r = 0; r < kk; ++r) {
      const int v = votes_dst[order[static_cast<std::size_t>(r)]];
      if (v == kAbstain) continue;
      if (nearest_vote == kAbstain) nearest_vote = v;
      sum += v;
    }
    out[q] = sum > 0 ? 1 : sum < 0 ? -1 : nearest_vote;
  }
  return out;
}

namespace {

// Group moments with a ridge proportional to the mean diagonal, so the
// regularization is scale-free.
ot::GaussianMoments group_moments(const Matrix& X, double ridge) {
  ot::GaussianMoments g = ot::fit_moments(X, 0.0);
  const double mean_diag = g.sigma.trace() / static_cast<double>(g.sigma.rows());
  g.sigma.diagonal().array() += ridge * (mean_diag > 0.0 ? mean_diag : 1.0);
  return g;
}

class MapCache {
 public:
  MapCache(const std::array<Matrix, kNumGroups>& X, const PipelineConfig& cfg) : X_(X), cfg_(cfg) {}

  const Matrix& transported(int src, int dst) {
    const auto key = std::make_pair(src, dst);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(key, compute(src, dst)).first->second;
  }

 private:
  Matrix compute(int src, int dst) const {
    const Matrix& Xs = X_[static_cast<std::size_t>(src)];
    const Matrix& Xd = X_[static_cast<std::size_t>(dst)];
    switch (cfg_.ot_type) {
      case OtType::none:
        return Xs;
      case OtType::linear: {
        const Eigen::Index need = Xs.cols() + 1;
        if (Xs.rows() < need || Xd.rows() < need) {
          std::ostringstream msg;
          msg << "linear transport needs at least d + 1 = " << need << " rows per group (group sizes "
              << X_[0].rows() << ", " << X_[1].rows() << ")";
          throw InputError(msg.str());
        }
        const auto map = ot::linear_monge(group_moments(Xs, cfg_.covariance_ridge),
                                          group_moments(Xd, cfg_.covariance_ridge));
        return ot::apply_monge(map, Xs);
      }
      case OtType::sinkhorn: {
        const Matrix M = ot::cost_matrix(Xs, Xd, cfg_.sinkhorn_cost);
        const ot::SinkhornOptions opt{cfg_.sinkhorn_eta, cfg_.sinkhorn_max_iter, cfg_.sinkhorn_tol};
        const auto plan = ot::sinkhorn_plan(M, ot::uniform_marginal(Xs.rows()), ot::uniform_marginal(Xd.rows()), opt);
        return ot::barycentric_map(plan, Xd);
      }
    }
    throw InputError("unknown ot_type");
  }

  const std::array<Matrix, kNumGroups>& X_;
  const PipelineConfig& cfg_;
  std::map<std::pair<int, int>, Matrix> cache_;
};

template <class Fn>
auto naming_lf(const std::string& who, Fn&& fn) {
  try {
    return fn();
  } catch (const NumericalError& e) {
    throw NumericalError(who + ": " + e.what());
  } catch (const InputError& e) {
    throw InputError(who + ": " + e.what());
  }
}

}  // namespace

RelabelResult sbm_transport(const GroupedDataset& ds, const WeakLabelMatrix& wl, const AccuracyEstimate& est,
                            const PipelineConfig& cfg) {
  require_valid(ds, wl);
  const Eigen::Index m = wl.m();
  if (est.per_lf_group.rows() != m || est.per_lf_group.cols() != kNumGroups)
    throw InputError("sbm_transport: per-group accuracy estimates must be m x 2");
  if (cfg.knn_k < 1) throw InputError("sbm_transport: knn_k must be positive");

  std::array<std::vector<Eigen::Index>, kNumGroups> rows;
  std::array<Matrix, kNumGroups> X;
  for (int g = 0; g < kNumGroups; ++g) {
    rows[g] = ds.rows_of_group(g);
    X[g] = ds.group_features(g);
    if (static_cast<Eigen::Index>(rows[g].size()) < cfg.knn_k) {
      std::ostringstream msg;
      msg << "group " << g << " has " << rows[g].size() << " rows, fewer than knn_k = " << cfg.knn_k;
      throw InputError(msg.str());
    }
  }

  RelabelResult result;
  result.new_votes = wl;
  MapCache maps(X, cfg);

  auto relabel = [&](Eigen::Index j, int src, int dst, const Matrix& X_src_mapped) {
    IntVector votes_dst(static_cast<Eigen::Index>(rows[dst].size()));
    for (std::size_t r = 0; r < rows[dst].size(); ++r) votes_dst[static_cast<Eigen::Index>(r)] = wl(rows[dst][r], j);
    const IntVector moved = knn_transfer(X_src_mapped, X[dst], votes_dst, cfg.knn_k);
    for (std::size_t r = 0; r < rows[src].size(); ++r)
      result.new_votes.votes(rows[src][r], j) = moved[static_cast<Eigen::Index>(r)];
  };

  auto decide = [&](std::optional<int> lf, double acc0, double acc1) {
    TransportDecision d;
    d.lf_index = lf;
    d.src_group = acc0 <= acc1 ? 0 : 1;
    d.dst_group = 1 - d.src_group;
    d.acc_src = std::min(acc0, acc1);
    d.acc_dst = std::max(acc0, acc1);
    if (!std::isfinite(acc0) || !std::isfinite(acc1)) {
      d.skipped = true;
      d.reason = "degenerate estimate";
    } else if (std::abs(acc0 - acc1) <= cfg.tie_tol) {
      d.skipped = true;
      d.reason = "tie";
    }
    return d;
  };

  if (cfg.transport_scope == TransportScope::per_lf) {
    for (Eigen::Index j = 0; j < m; ++j) {
      auto d = decide(static_cast<int>(j), est.per_lf_group(j, 0), est.per_lf_group(j, 1));
      if (!d.skipped) {
        naming_lf("lf " + std::to_string(j), [&] {
          relabel(j, d.src_group, d.dst_group, maps.transported(d.src_group, d.dst_group));
          return 0;
        });
      }
      result.decisions.push_back(std::move(d));
    }
  } else {
    const Vector mean_acc = est.per_lf_group.colwise().mean().transpose();
    auto d = decide(std::nullopt, mean_acc[0], mean_acc[1]);
    if (!d.skipped) {
      naming_lf("all lfs", [&] {
        const Matrix& mapped = maps.transported(d.src_group, d.dst_group);
        for (Eigen::Index j = 0; j < m; ++j) relabel(j, d.src_group, d.dst_group, mapped);
        return 0;
      });
    }
    result.decisions.push_back(std::move(d));
  }

  result.changed_mask = (result.new_votes.votes.array() != wl.votes.array()).matrix();
  return result;
}

}  // namespace sbm::transport
