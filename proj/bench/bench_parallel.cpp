// Times each OpenMP kernel against its serial reference and checks that the
// two agree. Prints one row per kernel.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "macroregime/correlation.hpp"
#include "macroregime/embedding.hpp"
#include "macroregime/leadlag.hpp"
#include "macroregime/signed_network.hpp"
#include "macroregime/similarity.hpp"
#include "macroregime/synth.hpp"

using namespace macroregime;

namespace {

template <class F>
double median_seconds(std::size_t reps, F&& f) {
  std::vector<double> t;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

double max_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
  // missing entries must match as missing
  double d = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (std::isnan(a(i, j)) || std::isnan(b(i, j))) {
        if (std::isnan(a(i, j)) != std::isnan(b(i, j))) return INFINITY;
        continue;
      }
      d = std::max(d, std::abs(a(i, j) - b(i, j)));
    }
  return d;
}

struct Row {
  std::string kernel;
  double serial = 0.0;
  double parallel = 0.0;
  double diff = 0.0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs OpenMP timings of the parallel kernels"};
  int threads = 0;
  std::size_t reps = 3, assets = 30, rows = 2000;
  app.add_option("--threads", threads, "OpenMP threads (0: runtime default)");
  app.add_option("--reps", reps, "repetitions per timing; the median is reported")->check(CLI::PositiveNumber);
  app.add_option("--assets", assets, "panel width")->check(CLI::Range(4, 500));
  app.add_option("--rows", rows, "panel length")->check(CLI::Range(200, 100000));
  CLI11_PARSE(app, argc, argv);
  set_thread_count(threads);

  const auto syn = planted_regime_panel(rows / 4, random_block_specs(4, assets, 1), 1);
  const auto& panel = syn.panel;
  const WindowSpec spec{2 * assets, 10, CorrelationMethod::weighted_kendall};
  std::vector<Row> out;

  {
    CorrelationStack a, b;
    const double ts = median_seconds(reps, [&] { a = serial::windowed_stack(panel, spec); });
    const double tp = median_seconds(reps, [&] { b = windowed_stack(panel, spec); });
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, max_diff(a.matrices[i], b.matrices[i]));
    out.push_back({"windowed_stack", ts, tp, d});
  }
  const auto stack = windowed_stack(panel, spec);
  {
    TimeSimilarityMatrix a, b;
    const double ts = median_seconds(reps, [&] { a = serial::metacorrelation_similarity(stack); });
    const double tp = median_seconds(reps, [&] { b = metacorrelation_similarity(stack); });
    out.push_back({"metacorrelation", ts, tp, max_diff(a.values, b.values)});
    const double cs = median_seconds(reps, [&] { a = serial::cophenetic_similarity(stack); });
    const double cp = median_seconds(reps, [&] { b = cophenetic_similarity(stack); });
    out.push_back({"cophenetic", cs, cp, max_diff(a.values, b.values)});
  }
  {
    const auto emb = pca_embed(metacorrelation_similarity(stack).values, PcaRequest::count(5));
    const KMeansOptions opt{.seed = 3, .restarts = 32};
    KMeansResult a, b;
    const double ts = median_seconds(reps, [&] { a = serial::kmeans(emb.points, 8, opt); });
    const double tp = median_seconds(reps, [&] { b = kmeans(emb.points, 8, opt); });
    out.push_back({"kmeans", ts, tp, a.labels == b.labels ? std::abs(a.inertia - b.inertia) : INFINITY});
  }
  {
    StabilityOptions opt;
    opt.lookback = 4;
    const auto ids = panel.asset_ids();
    StabilitySeries a, b;
    const double ts = median_seconds(reps, [&] { a = serial::stability_series(stack, ids, opt); });
    const double tp = median_seconds(reps, [&] { b = stability_series(stack, ids, opt); });
    double d = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
      d = std::max(d, std::isnan(a.values[i]) && std::isnan(b.values[i]) ? 0.0 : std::abs(a.values[i] - b.values[i]));
    out.push_back({"stability_series", ts, tp, d});
  }
  {
    const std::vector<RowSpan> spans{{0, panel.rows()}};
    LeadLagMatrix a, b;
    const double ts = median_seconds(reps, [&] { a = serial::leadlag_matrix(panel.values, spans, 5); });
    const double tp = median_seconds(reps, [&] { b = leadlag_matrix(panel.values, spans, 5); });
    out.push_back({"leadlag_matrix", ts, tp, max_diff(a.strengths, b.strengths)});
  }

  std::printf("threads=%d assets=%zu rows=%zu windows=%zu reps=%zu\n", thread_count(), assets, panel.rows(),
              stack.size(), reps);
  std::printf("%-18s %12s %12s %9s %12s\n", "kernel", "serial_s", "parallel_s", "speedup", "max_diff");
  bool agree = true;
  for (const auto& r : out) {
    std::printf("%-18s %12.4f %12.4f %9.2f %12.3g\n", r.kernel.c_str(), r.serial, r.parallel,
                r.parallel > 0.0 ? r.serial / r.parallel : 0.0, r.diff);
    agree = agree && r.diff <= 1e-9;
  }
  if (!agree) std::printf("serial and parallel results disagree\n");
  return agree ? 0 : 1;
}
