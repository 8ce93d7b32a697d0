// Acceptance gate: twelve end-to-end criteria, one pass/fail line each.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "feller/coeffs.hpp"
#include "feller/equilibrium.hpp"
#include "feller/risk.hpp"
#include "feller/sde.hpp"

using namespace feller;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void criterion(int number, const std::string& label, const std::function<bool(std::string&)>& fn) {
    std::string detail;
    bool ok = false;
    try {
        ok = fn(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    if (!ok) ++g_failures;
    std::cout << (ok ? "PASS" : "FAIL") << "  " << number << ": " << label;
    if (!detail.empty()) std::cout << "  [" << detail << "]";
    std::cout << "\n";
}

ModelParams benchmark_params(double gamma = 1.0) {
    ModelParams m;
    m.a = 1.0;
    m.q = 1.0;
    m.eps = 2.0;
    m.c = 0.0;
    m.n_banks = 10;
    m.horizon = 1.0;
    m.gamma = GrowthRate::constant(gamma);
    return m;
}

// Independent scalar backward RK4 of the Riccati ODE, reporting the sup-norm
// gap against the closed form over its own grid.
double riccati_gap(const ModelParams& m, GameMode mode, double steps_per_unit) {
    const double n = static_cast<double>(m.n_banks);
    const double f = mode == GameMode::MeanField ? 1.0 : 1.0 - 1.0 / (n * n);
    const double aq = m.a + m.q;
    const double forcing = m.eps - m.q * m.q;
    const auto rhs = [&](double e) { return 2.0 * aq * e + f * e * e - forcing; };
    const std::size_t steps = static_cast<std::size_t>(std::llround(steps_per_unit * m.horizon));
    const double h = m.horizon / static_cast<double>(steps);
    double e = m.c, gap = 0.0;
    for (std::size_t k = steps; k-- > 0;) {
        const double k1 = rhs(e);
        const double k2 = rhs(e - 0.5 * h * k1);
        const double k3 = rhs(e - 0.5 * h * k2);
        const double k4 = rhs(e - h * k3);
        e -= h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        gap = std::max(gap, std::abs(e - eta_closed_form(m, h * static_cast<double>(k), mode)));
    }
    return gap;
}

struct Moments {
    double mean, var, se_mean, se_var;
};

Moments reserve_moments(const PathEnsemble& ens) {
    const int P = ens.n_paths;
    double mean = 0.0;
    for (int p = 0; p < P; ++p) mean += ens.terminal_sum(p);
    mean /= P;
    double m2 = 0.0, m4 = 0.0;
    for (int p = 0; p < P; ++p) {
        const double d = ens.terminal_sum(p) - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= P;
    m4 /= P;
    return {mean, m2 * P / (P - 1), std::sqrt(m2 / P), std::sqrt(std::max(m4 - m2 * m2, 0.0) / P)};
}

struct LinearFit {
    double slope, intercept, r2;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    LinearFit f;
    const double den = n * sxx - sx * sx;
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double pred = f.slope * x[i] + f.intercept;
        ss_res += (y[i] - pred) * (y[i] - pred);
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

// Reads a CSV with a header into named columns.
std::vector<std::vector<double>> read_csv(const fs::path& p, int n_cols) {
    std::ifstream is(p);
    if (!is) throw std::runtime_error("cannot open " + p.string());
    std::string line;
    std::getline(is, line);  // header
    std::vector<std::vector<double>> cols(n_cols);
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string cell;
        for (int c = 0; c < n_cols && std::getline(row, cell, ','); ++c)
            cols[c].push_back(std::stod(cell));
    }
    return cols;
}

int run_cli(const std::string& args) {
    const char* bin = std::getenv("FELLER_BIN");
    if (!bin) return -1;
    const std::string cmd = std::string(bin) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

}  // namespace

int main() {
    std::cout.precision(8);

    criterion(1, "Riccati closed form matches an independent RK4 oracle (sup gap <= 1e-8)",
              [](std::string& d) {
                  std::mt19937_64 rng(2024);
                  std::uniform_real_distribution<double> u(0.0, 1.0);
                  double worst = 0.0;
                  for (int i = 0; i < 20; ++i) {
                      ModelParams m;
                      m.a = 2.0 * u(rng);
                      m.q = 1.5 * u(rng);
                      m.eps = m.q * m.q + 2.0 * u(rng);
                      m.c = u(rng);
                      m.n_banks = 2 + static_cast<int>(48 * u(rng));
                      m.horizon = 0.5 + 1.5 * u(rng);
                      const auto mode = (i % 2 == 0) ? GameMode::FinitePlayer : GameMode::MeanField;
                      worst = std::max(worst, riccati_gap(m, mode, 1e4));
                  }
                  worst = std::max(worst, riccati_gap(benchmark_params(), GameMode::FinitePlayer, 1e4));
                  ModelParams long_h = benchmark_params();
                  long_h.horizon = 100.0;
                  worst = std::max(worst, riccati_gap(long_h, GameMode::FinitePlayer, 1e3));
                  d = "sup gap " + std::to_string(worst);
                  return worst <= 1e-8;
              });

    criterion(2, "terminal conditions eta(T)=c, L(T)=phi(T)=mu(T)=0 to 1e-12", [](std::string&) {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 6; ++i) {
            ModelParams m;
            m.a = 2.0 * u(rng);
            m.q = u(rng);
            m.eps = m.q * m.q + u(rng);
            m.c = u(rng);
            m.n_banks = 2 + static_cast<int>(20 * u(rng));
            m.horizon = 0.5 + u(rng);
            m.gamma = GrowthRate::constant(u(rng));
            SolveOptions opts;
            opts.steps_per_unit_time = 2000;
            for (const auto& path : {solve_finite_horizon(m, opts), solve_mfg(m, opts)}) {
                if (std::abs(path.eta.back() - m.c) > 1e-12) return false;
                if (std::abs(path.L.back()) > 1e-12) return false;
                if (std::abs(path.phi.back()) > 1e-12) return false;
                if (std::abs(path.mu.back()) > 1e-12) return false;
            }
        }
        return true;
    });

    criterion(3, "HJB residual <= 1e-6*(1+|x|^2) over 1e3 samples, finite and stationary",
              [](std::string&) {
                  ModelParams m = benchmark_params();
                  auto coeffs = solve_finite_horizon(m);
                  ModelParams s = benchmark_params();
                  s.horizon = 0.0;
                  s.discount = 0.1;
                  s.mode = HorizonMode::Discounted;
                  auto st = solve_infinite_horizon(s);
                  std::mt19937_64 rng(12);
                  std::uniform_real_distribution<double> ut(0.001, 0.999), ux(0.0, 5.0);
                  for (int i = 0; i < 1000; ++i) {
                      std::vector<double> x(10);
                      double norm2 = 0.0;
                      for (double& v : x) {
                          v = ux(rng);
                          norm2 += v * v;
                      }
                      const double bound = 1e-6 * (1.0 + norm2);
                      if (std::abs(hjb_residual(m, coeffs, ut(rng), x, i % 10)) > bound)
                          return false;
                      if (std::abs(hjb_residual(s, st, x, i % 10)) > bound) return false;
                  }
                  return true;
              });

    criterion(4, "mean-field convergence is monotone in N and <= 1e-3 at N=1e4",
              [](std::string& d) {
                  double prev = 1e9, last = 0.0;
                  for (int N : {10, 100, 1000, 10000}) {
                      ModelParams m = benchmark_params();
                      m.n_banks = N;
                      double sup = 0.0;
                      for (int i = 0; i <= 200; ++i) {
                          const double t = i / 200.0;
                          sup = std::max(sup,
                                         std::abs(eta_closed_form(m, t, GameMode::FinitePlayer) -
                                                  eta_closed_form(m, t, GameMode::MeanField)));
                      }
                      if (sup >= prev) return false;
                      prev = last = sup;
                  }
                  d = "gap at N=1e4: " + std::to_string(last);
                  return last <= 1e-3;
              });

    criterion(5, "N=10 equilibrium vs 1-dim total reserve: Y_T moments within 3 SE",
              [](std::string& d) {
                  ModelParams m = benchmark_params();
                  auto coeffs = solve_finite_horizon(m);
                  SimConfig sim;
                  sim.dt = 1e-3;
                  sim.n_paths = 10000;
                  sim.seed = 1001;
                  sim.record = RecordMode::TerminalPlusEvents;
                  auto full = simulate_equilibrium(m, coeffs, sim, InitialCondition::point(1.0));

                  std::vector<double> grid = coeffs.grid, drift(coeffs.size());
                  for (std::size_t k = 0; k < coeffs.size(); ++k)
                      drift[k] = 10.0 * (m.gamma(grid[k]) - coeffs.psi[k]);
                  SimConfig sim1 = sim;
                  sim1.seed = 2002;
                  auto reduced = simulate_total_reserve(10.0, grid, drift, 1.0, sim1);

                  const auto a = reserve_moments(full), b = reserve_moments(reduced);
                  d = "mean " + std::to_string(a.mean) + " vs " + std::to_string(b.mean);
                  return std::abs(a.mean - b.mean) <= 3.0 * std::hypot(a.se_mean, b.se_mean) &&
                         std::abs(a.var - b.var) <= 3.0 * std::hypot(a.se_var, b.se_var);
              });

    criterion(6, "first-passage law: exact-sampler MC matches the survival formula (3 SE)",
              [](std::string& d) {
                  SimConfig sim;
                  sim.dt = 0.05;
                  sim.n_paths = 100000;
                  sim.seed = 6006;
                  sim.scheme = Scheme::ExactBesq;
                  sim.record = RecordMode::TerminalPlusEvents;
                  std::vector<double> grid{0.0, 1.0};
                  std::ostringstream msg;
                  for (double dim : {0.5, 0.0}) {
                      auto ens = simulate_total_reserve(1.0, grid, {dim, dim}, 1.0, sim);
                      int hits = 0;
                      for (int p = 0; p < ens.n_paths; ++p)
                          if (!std::isnan(ens.first_zero_time(p, 0))) ++hits;
                      const double surv = 1.0 - static_cast<double>(hits) / ens.n_paths;
                      const double ref = dim == 0.0
                          ? 1.0 - std::exp(-0.5)
                          : besq_zero_hit_survival(1.0, 1.0, dim, SurvivalFormula::StandardBesq);
                      const double se = std::sqrt(ref * (1.0 - ref) / ens.n_paths);
                      msg << "dim " << dim << ": " << surv << " vs " << ref << "; ";
                      if (std::abs(surv - ref) > 3.0 * se) {
                          d = msg.str();
                          return false;
                      }
                  }
                  d = msg.str();
                  return true;
              });

    criterion(7, "tail bounds bracket the MC survival estimate (time-varying psi)",
              [](std::string& d) {
                  ModelParams m = benchmark_params(0.17);
                  auto coeffs = solve_finite_horizon(m);
                  auto tb = tail_bounds(m, coeffs, 0.1, 1.0);

                  std::vector<double> drift(coeffs.size());
                  for (std::size_t k = 0; k < coeffs.size(); ++k)
                      drift[k] = 10.0 * (m.gamma(coeffs.grid[k]) - coeffs.psi[k]);
                  SimConfig sim;
                  sim.dt = 0.01;
                  sim.n_paths = 10000;
                  sim.seed = 7007;
                  sim.scheme = Scheme::ExactBesq;
                  sim.record = RecordMode::TerminalPlusEvents;
                  auto ens = simulate_total_reserve(0.1, coeffs.grid, drift, 1.0, sim);
                  int hits = 0;
                  for (int p = 0; p < ens.n_paths; ++p)
                      if (!std::isnan(ens.first_zero_time(p, 0))) ++hits;
                  const double surv = 1.0 - static_cast<double>(hits) / ens.n_paths;
                  const double se = std::sqrt(surv * (1.0 - surv) / ens.n_paths);
                  d = std::to_string(tb.lower) + " <= " + std::to_string(surv) +
                      " <= " + std::to_string(tb.upper);
                  return surv >= tb.lower - 3.0 * se && surv <= tb.upper + 3.0 * se;
              });

    criterion(8, "minimum incentive: analytic bound is exact at gamma=2, eps=2; 50 spot checks",
              [](std::string&) {
                  const auto iv = min_incentive_finite(2.0, 2.0);
                  if (std::abs(iv.q_low - 1.0) > 1e-15) return false;

                  // q just above the bound keeps the growth margin positive.
                  ModelParams m;
                  m.a = 0.0;
                  m.c = 0.0;
                  m.q = 1.05;
                  m.eps = 2.0;
                  m.n_banks = 10;
                  m.horizon = 5.0;
                  m.gamma = GrowthRate::constant(2.0);
                  SolveOptions opts;
                  opts.steps_per_unit_time = 2000;
                  auto coeffs = solve_mfg(m, opts);
                  double inf_margin = 1e300;
                  for (std::size_t k = 0; k < coeffs.size(); ++k)
                      inf_margin = std::min(inf_margin, 2.0 - coeffs.psi[k]);
                  if (!(inf_margin > 0.0)) return false;

                  std::mt19937_64 rng(88);
                  std::uniform_real_distribution<double> ug(0.5, 4.0), ue(0.2, 3.0), uf(0.05, 0.95);
                  for (int i = 0; i < 50; ++i) {
                      const double gamma = ug(rng), eps = ue(rng);
                      const auto bounds = min_incentive_finite(gamma, eps);
                      ModelParams p = m;
                      p.q = bounds.q_low + uf(rng) * (bounds.q_high - bounds.q_low);
                      p.eps = eps;
                      p.horizon = 3.0;
                      p.gamma = GrowthRate::constant(gamma);
                      auto c = solve_mfg(p, opts);
                      double margin = 1e300;
                      for (std::size_t k = 0; k < c.size(); ++k)
                          margin = std::min(margin, gamma - c.psi[k]);
                      if (!(margin > 0.0)) return false;
                  }
                  return true;
              });

    criterion(9, "stationary d(eta)/dq: negative and matching central differences (1e-6 rel)",
              [](std::string&) {
                  std::mt19937_64 rng(99);
                  std::uniform_real_distribution<double> u(0.0, 1.0);
                  for (int i = 0; i < 20; ++i) {
                      ModelParams p;
                      p.a = 2.0 * u(rng);
                      p.eps = 0.3 + 2.0 * u(rng);
                      p.n_banks = 2 + static_cast<int>(40 * u(rng));
                      p.discount = 0.05 + u(rng);
                      p.mode = HorizonMode::Discounted;
                      p.gamma = GrowthRate::constant(1.0);
                      const double qmax = std::sqrt(p.eps);
                      for (int g = 0; g <= 10; ++g) {
                          p.q = qmax * g / 10.0;
                          const double der = eta_q_derivative(p);
                          if (!(der < 0.0)) return false;
                          const double h = 1e-6;
                          if (p.q - h < 0.0 || (p.q + h) * (p.q + h) > p.eps) continue;
                          ModelParams lo = p, hi = p;
                          lo.q -= h;
                          hi.q += h;
                          const double fd =
                              (solve_infinite_horizon(hi).eta - solve_infinite_horizon(lo).eta) /
                              (2.0 * h);
                          if (std::abs(der - fd) > 1e-6 * std::abs(der)) return false;
                      }
                  }
                  return true;
              });

    criterion(10, "regime classifier: four branches plus the 2/N boundary", [](std::string&) {
        for (int N : {2, 10, 100}) {
            const double thr = 2.0 / N;
            if (classify_regime(thr * 2.0, N).regime != Regime::NeverHitsZero) return false;
            if (classify_regime(thr, N).regime != Regime::HitsZeroRecurrent) return false;
            if (!classify_regime(thr, N).boundary) return false;
            if (classify_regime(thr * 0.5, N).regime != Regime::HitsZeroReflecting) return false;
            if (classify_regime(0.0, N).regime != Regime::AbsorbedFiniteTime) return false;
        }
        return true;
    });

    criterion(11, "byte-identical simulate outputs across reruns and thread counts",
              [](std::string& d) {
                  if (!std::getenv("FELLER_BIN")) {
                      d = "FELLER_BIN not set";
                      return false;
                  }
                  const auto dir = fs::temp_directory_path() / "feller_acceptance_det";
                  fs::remove_all(dir);
                  fs::create_directories(dir);
                  const char* base = R"([model]
a = 1.0
q = 1.0
eps = 2.0
banks = 10
horizon = 1.0
gamma = 1.0

[simulation]
dt = 0.005
paths = 64
seed = 31337
system = equilibrium
x0 = 1.0

[output]
formats = csv, binary
stride = 20
)";
                  for (int threads : {1, 4, 7}) {
                      std::ofstream(dir / ("scn" + std::to_string(threads))) << base
                          << "\n[simulation]\nthreads = " << threads << "\n";
                  }
                  // Same scenario except for the thread count; plus a rerun.
                  std::string ref_csv, ref_bin;
                  for (int threads : {1, 1, 4, 7}) {
                      static int run = 0;
                      const auto out = dir / ("out" + std::to_string(run++));
                      const int rc = run_cli("simulate --scenario " +
                                             (dir / ("scn" + std::to_string(threads))).string() +
                                             " --out " + out.string());
                      if (rc != 0) {
                          d = "cli exit " + std::to_string(rc);
                          return false;
                      }
                      const auto csv = slurp(out / "paths.csv");
                      const auto bin = slurp(out / "paths.bin");
                      if (ref_csv.empty()) {
                          ref_csv = csv;
                          ref_bin = bin;
                      } else if (csv != ref_csv || bin != ref_bin) {
                          d = "outputs differ at threads=" + std::to_string(threads);
                          return false;
                      }
                  }
                  return true;
              });

    criterion(12, "figure replication: flocking, >=95% absorption, coefficient shapes",
              [](std::string& d) {
                  if (!std::getenv("FELLER_BIN")) {
                      d = "FELLER_BIN not set";
                      return false;
                  }
                  const auto dir = fs::temp_directory_path() / "feller_acceptance_figs";
                  fs::remove_all(dir);
                  fs::create_directories(dir);
                  if (run_cli("replicate-figures --out " + dir.string()) != 0) {
                      d = "cli failed";
                      return false;
                  }

                  // (i) Flocking: the normalized cross-sectional spread of the
                  // growing system stays bounded with no linear trend.
                  auto sp = read_csv(dir / "fig1" / "spread_left.csv", 3);
                  std::vector<double> ts, ratio;
                  for (std::size_t i = 0; i < sp[0].size(); ++i) {
                      if (sp[0][i] < 10.0 || sp[1][i] <= 0.0) continue;
                      ts.push_back(sp[0][i]);
                      ratio.push_back(sp[2][i] / sp[1][i]);
                  }
                  double mean_ratio = 0.0, max_ratio = 0.0;
                  for (double r : ratio) {
                      mean_ratio += r;
                      max_ratio = std::max(max_ratio, r);
                  }
                  mean_ratio /= static_cast<double>(ratio.size());
                  const auto trend = fit_line(ts, ratio);
                  if (max_ratio > 1.0) {
                      d = "spread ratio unbounded: " + std::to_string(max_ratio);
                      return false;
                  }
                  if (std::abs(trend.slope) * 90.0 > std::max(0.5 * mean_ratio, 0.05)) {
                      d = "spread ratio trending: slope " + std::to_string(trend.slope);
                      return false;
                  }

                  // (i) Absorption: gamma = 0 kills the total reserve within the
                  // horizon on at least 95 of 100 paths.
                  auto ab = read_csv(dir / "fig2" / "absorption_stats.csv", 3);
                  int absorbed = 0;
                  for (double v : ab[2]) absorbed += v > 0.5;
                  if (absorbed < 95) {
                      d = "absorbed " + std::to_string(absorbed) + "/100";
                      return false;
                  }

                  // (ii) Coefficient curves: eta >= 0, psi >= 0, psi(T) = 0, and
                  // near-linear psi growth toward t=0 on the long horizon.
                  for (const char* fig : {"fig3", "fig4"}) {
                      auto co = read_csv(dir / fig / "coefficients.csv", 6);
                      for (double v : co[1])
                          if (v < -1e-15) return false;
                      for (double v : co[5])
                          if (v < -1e-12) return false;
                      if (std::abs(co[5].back()) > 1e-12) return false;
                  }
                  auto co4 = read_csv(dir / "fig4" / "coefficients.csv", 6);
                  std::vector<double> t4, psi4;
                  for (std::size_t i = 0; i < co4[0].size(); ++i) {
                      if (co4[0][i] > 50.0) break;
                      t4.push_back(co4[0][i]);
                      psi4.push_back(co4[5][i]);
                  }
                  const auto fit = fit_line(t4, psi4);
                  d = "psi linear fit R^2 = " + std::to_string(fit.r2);
                  return fit.r2 >= 0.99;
              });

    std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: ")
              << (g_failures == 0 ? "" : std::to_string(g_failures)) << "\n";
    return g_failures;
}
