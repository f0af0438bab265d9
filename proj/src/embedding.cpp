#include "macroregime/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include <Eigen/SVD>

namespace macroregime {

// PCA ----------------------------------------------------------------------------

Embedding pca_embed(const Eigen::MatrixXd& data, const PcaRequest& request, Diagnostics* diag) {
  if (data.rows() < 2 || data.cols() < 1) throw PreconditionError("pca_embed needs at least 2 rows");
  if (!data.allFinite()) throw PreconditionError("pca_embed: input contains missing or non-finite values");
  const bool by_count = request.dims > 0;
  if (!by_count && !(request.variance_target > 0.0 && request.variance_target <= 1.0))
    throw PreconditionError("pca_embed: need dims >= 1 or a variance target in (0, 1]");

  Embedding out;
  out.mean = data.colwise().mean();
  const Eigen::MatrixXd centred = data.rowwise() - out.mean;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double tol = (sv.size() > 0 ? sv(0) : 0.0) * static_cast<double>(std::max(data.rows(), data.cols())) *
                     std::numeric_limits<double>::epsilon();
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > tol) ++rank;
  if (rank == 0) throw PreconditionError("pca_embed: all rows are identical");

  const Eigen::VectorXd var = sv.head(rank).array().square();
  out.explained_ratio = var / var.sum();

  std::size_t dims = 0;
  if (by_count) {
    dims = request.dims;
    if (dims > static_cast<std::size_t>(rank)) {
      warn(diag, "pca_embed: requested " + std::to_string(dims) + " dims but the data has rank " +
                     std::to_string(rank) + "; clamped");
      dims = static_cast<std::size_t>(rank);
    }
  } else {
    double cum = 0.0;
    while (dims < static_cast<std::size_t>(rank)) {
      cum += out.explained_ratio(static_cast<Eigen::Index>(dims));
      ++dims;
      if (cum >= request.variance_target - 1e-12) break;
    }
  }
  const auto d = static_cast<Eigen::Index>(dims);
  out.dims = dims;
  out.explained_variance = std::min(1.0, out.explained_ratio.head(d).sum());

  out.axes = svd.matrixV().leftCols(d);
  for (Eigen::Index c = 0; c < d; ++c) {
    Eigen::Index arg = 0;
    out.axes.col(c).cwiseAbs().maxCoeff(&arg);
    if (out.axes(arg, c) < 0) out.axes.col(c) *= -1.0;
  }
  out.points = centred * out.axes;
  return out;
}

// KMeans -------------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform in [0, 1) from the top 53 bits; independent of the library's distributions.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t sample_index(std::mt19937_64& rng, const std::vector<double>& weights, double total) {
  const double target = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (acc > target) return i;
  }
  return last_positive;
}

double sq_dist(const Eigen::MatrixXd& p, Eigen::Index i, const Eigen::MatrixXd& c, Eigen::Index j) {
  return (p.row(i) - c.row(j)).squaredNorm();
}

// Greedy k-means++: each new centre is the best of 2 + ln(k) D^2-sampled candidates.
Eigen::MatrixXd seed_plus_plus(const Eigen::MatrixXd& pts, std::size_t k, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(pts.rows());
  Eigen::MatrixXd centres(static_cast<Eigen::Index>(k), pts.cols());
  const std::size_t first = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
  centres.row(0) = pts.row(static_cast<Eigen::Index>(std::min(first, n - 1)));
  std::vector<double> closest(n);
  for (std::size_t i = 0; i < n; ++i) closest[i] = sq_dist(pts, static_cast<Eigen::Index>(i), centres, 0);
  const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
  std::vector<bool> used(n, false);
  used[std::min(first, n - 1)] = true;

  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : closest) total += v;
    std::size_t best = n;
    double best_pot = std::numeric_limits<double>::infinity();
    std::vector<double> best_closest;
    if (total <= 0.0) {
      // all remaining points coincide with existing centres
      best = static_cast<std::size_t>(std::find(used.begin(), used.end(), false) - used.begin());
      if (best == n) best = 0;
      best_closest = closest;
    } else {
      for (std::size_t t = 0; t < trials; ++t) {
        const auto cand = sample_index(rng, closest, total);
        std::vector<double> next(n);
        double pot = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          next[i] = std::min(closest[i], (pts.row(static_cast<Eigen::Index>(i)) -
                                          pts.row(static_cast<Eigen::Index>(cand))).squaredNorm());
          pot += next[i];
        }
        if (pot < best_pot) {
          best_pot = pot;
          best = cand;
          best_closest = std::move(next);
        }
      }
    }
    used[best] = true;
    centres.row(static_cast<Eigen::Index>(c)) = pts.row(static_cast<Eigen::Index>(best));
    for (std::size_t i = 0; i < n; ++i)
      closest[i] = std::min(best_closest[i],
                            sq_dist(pts, static_cast<Eigen::Index>(i), centres, static_cast<Eigen::Index>(c)));
  }
  return centres;
}

double assign(const Eigen::MatrixXd& pts, const Eigen::MatrixXd& centres, std::vector<int>& labels,
              std::vector<double>& dist) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centres.rows(); ++c) {
      const double d = sq_dist(pts, i, centres, c);
      if (d < bd) {
        bd = d;
        best = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    dist[static_cast<std::size_t>(i)] = bd;
    inertia += bd;
  }
  return inertia;
}

KMeansResult lloyd(const Eigen::MatrixXd& pts, std::size_t k, const KMeansOptions& opt, std::size_t restart) {
  std::mt19937_64 rng(splitmix64(opt.seed ^ splitmix64(restart + 1)));
  Eigen::MatrixXd centres = seed_plus_plus(pts, k, rng);
  const auto n = static_cast<std::size_t>(pts.rows());
  std::vector<int> labels(n);
  std::vector<double> dist(n);
  KMeansResult res;
  for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
    assign(pts, centres, labels, dist);
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(centres.rows(), centres.cols());
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      next.row(labels[i]) += pts.row(static_cast<Eigen::Index>(i));
      ++count[static_cast<std::size_t>(labels[i])];
    }
    std::vector<bool> taken(n, false);
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] > 0) {
        next.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(count[c]);
        continue;
      }
      // empty cluster: move its centre onto the point farthest from its own centre
      std::size_t far = n;
      double fd = -1.0;
      for (std::size_t i = 0; i < n; ++i)
        if (!taken[i] && count[static_cast<std::size_t>(labels[i])] > 1 && dist[i] > fd) {
          fd = dist[i];
          far = i;
        }
      if (far == n) far = 0;
      taken[far] = true;
      --count[static_cast<std::size_t>(labels[far])];
      next.row(static_cast<Eigen::Index>(c)) = pts.row(static_cast<Eigen::Index>(far));
    }
    const double shift = (next - centres).rowwise().norm().maxCoeff();
    centres = std::move(next);
    if (shift < opt.tolerance) {
      ++res.iterations;
      break;
    }
  }
  res.inertia = assign(pts, centres, labels, dist);
  res.labels = std::move(labels);
  res.centroids = std::move(centres);
  return res;
}

void check_inputs(const Eigen::MatrixXd& points, std::size_t k, const KMeansOptions& opt) {
  if (points.rows() == 0) throw PreconditionError("kmeans: no points");
  if (k < 1 || k > static_cast<std::size_t>(points.rows()))
    throw PreconditionError("kmeans: k=" + std::to_string(k) + " outside [1, " + std::to_string(points.rows()) + "]");
  if (opt.restarts < 1) throw PreconditionError("kmeans: restarts must be >= 1");
  if (!points.allFinite()) throw PreconditionError("kmeans: non-finite coordinates");
}

KMeansResult finish(const std::vector<KMeansResult>& runs) {
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].inertia < runs[best].inertia) best = r;
  KMeansResult out = runs[best];
  // canonical label order; permute centroids to match
  const auto canon = relabel_by_first_occurrence(out.labels);
  Eigen::MatrixXd c = out.centroids;
  std::map<int, int> mapping;
  for (std::size_t i = 0; i < canon.size(); ++i) mapping[out.labels[i]] = canon[i];
  int next_free = static_cast<int>(mapping.size());
  for (Eigen::Index old = 0; old < c.rows(); ++old) {
    const auto it = mapping.find(static_cast<int>(old));
    const int dst = it != mapping.end() ? it->second : next_free++;
    c.row(dst) = out.centroids.row(old);
  }
  out.centroids = std::move(c);
  out.labels = canon;
  return out;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, const KMeansOptions& options) {
  check_inputs(points, k, options);
  std::vector<KMeansResult> runs(options.restarts);
  const auto count = static_cast<std::ptrdiff_t>(options.restarts);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t r = 0; r < count; ++r)
    runs[static_cast<std::size_t>(r)] = lloyd(points, k, options, static_cast<std::size_t>(r));
  return finish(runs);
}

namespace serial {

KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, const KMeansOptions& options) {
  check_inputs(points, k, options);
  std::vector<KMeansResult> runs;
  for (std::size_t r = 0; r < options.restarts; ++r) runs.push_back(lloyd(points, k, options, r));
  return finish(runs);
}

}  // namespace serial

double total_inertia(const Eigen::MatrixXd& points) {
  const Eigen::RowVectorXd mean = points.colwise().mean();
  return (points.rowwise() - mean).squaredNorm();
}

std::vector<int> relabel_by_first_occurrence(std::span<const int> labels) {
  std::map<int, int> mapping;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto [it, inserted] = mapping.emplace(l, static_cast<int>(mapping.size()));
    out.push_back(it->second);
  }
  return out;
}

}  // namespace macroregime
