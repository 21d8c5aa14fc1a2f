#pragma once

// Unit-distance embeddings of the pendant-cycle graphs G_k on S^2(r):
// constraint residuals, the analytic Jacobian in the cycle variables, the
// closed-form two-m-gon embedding, the determinant factorization behind the
// rigidity certificate, Newton recovery of the cycle under pendant
// perturbations, and least-squares embedding / minimal-radius search for
// arbitrary graphs.

#include "chromasphere/graph.hpp"
#include "chromasphere/parallel.hpp"
#include "chromasphere/rng.hpp"
#include "chromasphere/sphere.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chromasphere {

/// Largest radius handled by the closed-form G_k construction; above it the
/// equilateral triangle already certifies the bound and the two-m-gon
/// geometry degenerates.
inline constexpr double kGkMaxRadius = 0.57735026918962576;  // sqrt(3)/3

/// Variables of the embedding system: m pendant points x_i (free in R^3)
/// and m cycle points y_i (constrained to the sphere by the residuals).
struct EmbeddingVars {
  int m = 0;
  std::vector<Vec3> x;
  std::vector<Vec3> y;

  EmbeddingVars() = default;
  EmbeddingVars(int m_, std::vector<Vec3> x_, std::vector<Vec3> y_)
      : m(m_), x(std::move(x_)), y(std::move(y_)) {
    if (m < 3 || m % 2 == 0)
      throw std::invalid_argument("EmbeddingVars: m must be odd and >= 3");
    if (x.size() != static_cast<size_t>(m) || y.size() != static_cast<size_t>(m))
      throw LengthMismatch("EmbeddingVars: need m pendant and m cycle points");
    for (const auto& v : x)
      if (!v.allFinite()) throw std::invalid_argument("EmbeddingVars: non-finite x");
    for (const auto& v : y)
      if (!v.allFinite()) throw std::invalid_argument("EmbeddingVars: non-finite y");
  }
};

/// Residual of the embedding system, ordered as: m sphere constraints
/// |y_i|^2 - r^2, then the m cycle edges |y_i - y_{i+1}|^2 - 1 (wrap edge
/// last), then the m pendant edges |x_i - y_i|^2 - 1.
inline Eigen::VectorXd residual(const EmbeddingVars& vars, double r) {
  const int m = vars.m;
  Eigen::VectorXd f(3 * m);
  for (int i = 0; i < m; ++i)
    f(i) = vars.y[i].squaredNorm() - r * r;
  for (int i = 0; i < m - 1; ++i)
    f(m + i) = (vars.y[i] - vars.y[i + 1]).squaredNorm() - 1.0;
  f(2 * m - 1) = (vars.y[m - 1] - vars.y[0]).squaredNorm() - 1.0;
  for (int i = 0; i < m; ++i)
    f(2 * m + i) = (vars.x[i] - vars.y[i]).squaredNorm() - 1.0;
  return f;
}

/// Analytic Jacobian of the residual with respect to the cycle variables Y
/// (3m x 3m). Row blocks: 2 y_i, the 2 (y_i - y_{i+1}) edge pairs, and
/// 2 (y_i - x_i) for the pendants. Independent of r.
inline Eigen::MatrixXd jacobian_y(const EmbeddingVars& vars) {
  const int m = vars.m;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(3 * m, 3 * m);
  for (int i = 0; i < m; ++i)
    J.block<1, 3>(i, 3 * i) = 2.0 * vars.y[i].transpose();
  for (int i = 0; i < m - 1; ++i) {
    Vec3 diff = vars.y[i] - vars.y[i + 1];
    J.block<1, 3>(m + i, 3 * i) = 2.0 * diff.transpose();
    J.block<1, 3>(m + i, 3 * (i + 1)) = -2.0 * diff.transpose();
  }
  {
    Vec3 diff = vars.y[m - 1] - vars.y[0];
    J.block<1, 3>(2 * m - 1, 3 * (m - 1)) = 2.0 * diff.transpose();
    J.block<1, 3>(2 * m - 1, 0) = -2.0 * diff.transpose();
  }
  for (int i = 0; i < m; ++i)
    J.block<1, 3>(2 * m + i, 3 * i) = 2.0 * (vars.y[i] - vars.x[i]).transpose();
  return J;
}

struct InfeasibleWinding : std::domain_error {
  InfeasibleWinding(const std::string& msg, int smallest_k)
      : std::domain_error(msg), smallest_feasible_k(smallest_k) {}
  int smallest_feasible_k;
};

struct InfeasiblePendant : std::logic_error {
  using std::logic_error::logic_error;
};

/// Closed-form embedding of G_k: cycle vertices on a star m-gon of winding l
/// in the plane z = h, pendant vertices on the congruent m-gon in z = -h,
/// rotated by the offset angle phi.
struct GkEmbedding {
  SphereParams params;
  int k = 0;
  int m = 0;
  int l = 0;       ///< winding: angular step of the star polygon is 2*pi*l/m
  double R = 0.0;  ///< circumradius of both m-gons
  double h = 0.0;  ///< half-separation of the two planes z = +-h
  double phi = 0.0;
  EmbeddingVars vars;
};

/// Smallest k whose default winding l = k satisfies R(l) < r.
inline int smallest_feasible_k(double r) {
  if (!(r > 0.5))
    throw DegenerateInput("smallest_feasible_k: need r > 1/2");
  for (int k = 1;; ++k) {
    int m = 2 * k + 1;
    double R = 1.0 / (2.0 * std::sin(std::numbers::pi * k / m));
    if (R < r) return k;
  }
}

/// Constructs the closed-form G_k embedding at radius r.
///
/// The winding defaults to l = k, which makes the chord factor
/// sin(pi l / m) approach 1 and the circumradius approach 1/2, so every
/// radius in (1/2, sqrt(3)/3] becomes feasible for k large enough. The
/// cycle edges are unit by construction (2 R sin(pi l / m) = 1), the planes
/// sit at z = +-h with h = sqrt(r^2 - R^2), and the pendant offset solves
/// 2 R^2 (1 - cos phi) + 4 h^2 = 1 with phi > 0.
inline GkEmbedding closed_form_gk(double r, int k, int l = 0) {
  if (k < 1) throw std::invalid_argument("closed_form_gk: need k >= 1");
  if (!(r > 0.5) || r > kGkMaxRadius + 1e-12)
    throw std::invalid_argument(
        "closed_form_gk: radius must lie in (1/2, sqrt(3)/3], got " +
        std::to_string(r));
  const int m = 2 * k + 1;
  if (l == 0) l = k;
  if (l < 1 || l > k || std::gcd(l, m) != 1)
    throw std::invalid_argument("closed_form_gk: winding l must satisfy "
                                "1 <= l <= k and gcd(l, 2k+1) = 1");

  const double pi = std::numbers::pi;
  const double R = 1.0 / (2.0 * std::sin(pi * l / m));
  if (R > r * (1.0 + 1e-12))
    throw InfeasibleWinding(
        "closed_form_gk: circumradius R = " + std::to_string(R) +
            " does not fit below r = " + std::to_string(r) +
            "; smallest feasible k is " + std::to_string(smallest_feasible_k(r)),
        smallest_feasible_k(r));

  const double h = std::sqrt(std::max(r * r - R * R, 0.0));
  const double pendant_gap = 1.0 - 4.0 * h * h;
  if (pendant_gap < 0.0)
    throw InfeasiblePendant("closed_form_gk: 1 - 4h^2 < 0 cannot happen for "
                            "r <= sqrt(3)/3");
  double cos_phi = 1.0 - pendant_gap / (2.0 * R * R);
  cos_phi = std::clamp(cos_phi, -1.0, 1.0);
  const double phi = std::acos(cos_phi);

  std::vector<Vec3> x(m), y(m);
  for (int i = 0; i < m; ++i) {
    double theta = 2.0 * pi * l * i / m;
    y[i] = Vec3(R * std::cos(theta), R * std::sin(theta), h);
    x[i] = Vec3(R * std::cos(theta + phi), R * std::sin(theta + phi), -h);
  }
  GkEmbedding emb{SphereParams(r), k, m, l, R, h, phi,
                  EmbeddingVars(m, std::move(x), std::move(y))};

  if (!(emb.h < 1.0 / (2.0 * std::sqrt(3.0)) + 1e-12))
    throw InfeasiblePendant("closed_form_gk: h >= 1/(2 sqrt 3)");
  double res = residual(emb.vars, r).cwiseAbs().maxCoeff();
  if (res > 1e-12)
    throw std::logic_error("closed_form_gk: construction residual " +
                           std::to_string(res) + " exceeds 1e-12");
  return emb;
}

/// V_i = -det[y_i; y_{i+1}; x_i] and V'_i = det[y_i; y_{i+1}; x_{i+1}],
/// rows stacked, indices mod m. For the symmetric closed form all V_i
/// coincide and all V'_i coincide.
inline std::pair<std::vector<double>, std::vector<double>> v_values(
    const EmbeddingVars& vars) {
  const int m = vars.m;
  std::vector<double> v(m), vp(m);
  for (int i = 0; i < m; ++i) {
    int j = (i + 1) % m;
    Mat3 a, b;
    a.row(0) = vars.y[i];
    a.row(1) = vars.y[j];
    a.row(2) = vars.x[i];
    b.row(0) = vars.y[i];
    b.row(1) = vars.y[j];
    b.row(2) = vars.x[j];
    v[i] = -a.determinant();
    vp[i] = b.determinant();
  }
  return {v, vp};
}

struct DetFactorization {
  double det_numeric = 0.0;      ///< LU determinant of the 3m x 3m Jacobian
  double det_closed_form = 0.0;  ///< 2^{3m} (V^m + V'^m)
  double relative_error = 0.0;   ///< on absolute values; the row reordering
                                 ///< behind the closed form may flip sign
};

inline DetFactorization det_factorization_check(const EmbeddingVars& vars) {
  const int m = vars.m;
  double det_numeric = Eigen::PartialPivLU<Eigen::MatrixXd>(jacobian_y(vars))
                           .determinant();
  auto [v, vp] = v_values(vars);
  double det_closed =
      std::pow(2.0, 3 * m) * (std::pow(v[0], m) + std::pow(vp[0], m));
  double scale = std::max({std::abs(det_numeric), std::abs(det_closed),
                           std::numeric_limits<double>::min()});
  double rel = std::abs(std::abs(det_numeric) - std::abs(det_closed)) / scale;
  return {det_numeric, det_closed, rel};
}

struct RigidityCertificate {
  double v_plus_vp = 0.0;
  double det_abs = 0.0;
  bool certified = false;
};

/// Certifies local solvability in Y: nondegenerate Jacobian at the
/// embedding. For odd m, V^m + V'^m = 0 over the reals iff V = -V', so
/// |V + V'| > 1e-10 together with a nonzero LU determinant certifies.
inline RigidityCertificate rigidity_certificate(const GkEmbedding& emb) {
  auto [v, vp] = v_values(emb.vars);
  double v_plus_vp = v[0] + vp[0];
  double det_abs = std::abs(
      Eigen::PartialPivLU<Eigen::MatrixXd>(jacobian_y(emb.vars)).determinant());
  bool certified = emb.h < 1.0 / (2.0 * std::sqrt(3.0)) &&
                   std::abs(v_plus_vp) > 1e-10 && det_abs > 0.0;
  return {v_plus_vp, det_abs, certified};
}

enum class SolveStatus { Converged, NoConvergence, SingularJacobian };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::NoConvergence: return "no_convergence";
    case SolveStatus::SingularJacobian: return "singular_jacobian";
  }
  return "unknown";
}

struct SolveReport {
  SolveStatus status = SolveStatus::NoConvergence;
  bool converged = false;
  int iterations = 0;
  double residual_norm = std::numeric_limits<double>::infinity();
  EmbeddingVars solution;
  std::vector<double> residual_history;
};

/// Newton iteration on Y for fixed (possibly perturbed) pendants X.
///
/// Hard contract: converged is set only when the final residual infinity
/// norm is at most tol. A pivot of the LU factorization below 1e-13 stops
/// the iteration with SingularJacobian.
inline SolveReport newton_solve_y(const std::vector<Vec3>& x_perturbed,
                                  const std::vector<Vec3>& y_init, double r,
                                  double tol = 1e-12, int max_iter = 50) {
  const int m = static_cast<int>(y_init.size());
  EmbeddingVars vars(m, x_perturbed, y_init);
  SolveReport report;
  report.solution = vars;

  Eigen::VectorXd f = residual(vars, r);
  report.residual_history.push_back(f.cwiseAbs().maxCoeff());
  for (int iter = 0;; ++iter) {
    double norm = f.cwiseAbs().maxCoeff();
    report.residual_norm = norm;
    report.iterations = iter;
    report.solution = vars;
    if (norm <= tol) {
      report.status = SolveStatus::Converged;
      report.converged = true;
      return report;
    }
    if (iter >= max_iter) {
      report.status = SolveStatus::NoConvergence;
      return report;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jacobian_y(vars));
    if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() < 1e-13) {
      report.status = SolveStatus::SingularJacobian;
      return report;
    }
    Eigen::VectorXd delta = lu.solve(-f);
    for (int i = 0; i < m; ++i) vars.y[i] += delta.segment<3>(3 * i);
    f = residual(vars, r);
    report.residual_history.push_back(f.cwiseAbs().maxCoeff());
  }
}

struct StabilityReport {
  double eta = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
  int successes = 0;
  double success_rate = 0.0;
  double max_residual = 0.0;    ///< over recovered (converged) trials
  int max_iterations = 0;       ///< over recovered trials
};

/// Runs newton_solve_y on `trials` perturbations of the pendant vector,
/// each coordinate drawn uniformly from [-eta, eta] on the substream
/// (seed, trial). Deterministic for every worker count.
inline StabilityReport stability_probe(const GkEmbedding& emb, double eta,
                                       int trials, std::uint64_t seed,
                                       int workers = 0, double tol = 1e-12,
                                       int max_iter = 50) {
  if (eta < 0.0) throw std::invalid_argument("stability_probe: negative eta");
  if (trials < 1) throw std::invalid_argument("stability_probe: need trials >= 1");
  if (!rigidity_certificate(emb).certified)
    throw std::invalid_argument("stability_probe: embedding is not certified");

  struct TrialResult {
    bool converged = false;
    double residual = 0.0;
    int iterations = 0;
  };
  std::vector<TrialResult> results(trials);
  const double r = emb.params.r();
  parallel_for(trials, workers, [&](int t) {
    RngStream rng(seed, static_cast<std::uint64_t>(t));
    std::vector<Vec3> x = emb.vars.x;
    for (auto& p : x)
      for (int c = 0; c < 3; ++c) p[c] += rng.uniform(-eta, eta);
    SolveReport rep = newton_solve_y(x, emb.vars.y, r, tol, max_iter);
    results[t] = {rep.converged, rep.residual_norm, rep.iterations};
  });

  StabilityReport out;
  out.eta = eta;
  out.trials = trials;
  out.seed = seed;
  for (const auto& res : results) {
    if (res.converged) {
      ++out.successes;
      out.max_residual = std::max(out.max_residual, res.residual);
      out.max_iterations = std::max(out.max_iterations, res.iterations);
    }
  }
  out.success_rate = static_cast<double>(out.successes) / trials;
  return out;
}

struct NoEmbeddingFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmbedOptions {
  int starts = 60;
  std::uint64_t seed = 0;
  double tol = 1e-12;              ///< target residual for each local solve
  double success_residual = 1e-10; ///< embedding accepted below this
  int max_iter = 400;
  int workers = 0;
  /// Tried before the random starts (continuation / warm starting).
  std::vector<std::vector<Vec3>> initial_guesses;
};

struct GraphEmbedResult {
  bool success = false;
  double residual_norm = std::numeric_limits<double>::infinity();
  int iterations = 0;
  int best_start = -1;  ///< global start index; guesses come first
  std::vector<Vec3> points;
};

namespace detail {

struct GraphSystem {
  const Graph& g;
  double r;

  int constraints() const { return g.n() + g.edge_count(); }

  Eigen::VectorXd eval(const Eigen::VectorXd& q) const {
    const int n = g.n();
    Eigen::VectorXd f(constraints());
    for (int v = 0; v < n; ++v)
      f(v) = q.segment<3>(3 * v).squaredNorm() - r * r;
    int row = n;
    for (auto [a, b] : g.edges())
      f(row++) = (q.segment<3>(3 * a) - q.segment<3>(3 * b)).squaredNorm() - 1.0;
    return f;
  }

  Eigen::MatrixXd jac(const Eigen::VectorXd& q) const {
    const int n = g.n();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(constraints(), 3 * n);
    for (int v = 0; v < n; ++v)
      J.block<1, 3>(v, 3 * v) = 2.0 * q.segment<3>(3 * v).transpose();
    int row = n;
    for (auto [a, b] : g.edges()) {
      Eigen::RowVector3d diff =
          2.0 * (q.segment<3>(3 * a) - q.segment<3>(3 * b)).transpose();
      J.block<1, 3>(row, 3 * a) = diff;
      J.block<1, 3>(row, 3 * b) = -diff;
      ++row;
    }
    return J;
  }
};

/// Damped Gauss-Newton (Levenberg style) on the stacked coordinates:
/// lambda doubles on a rejected step and shrinks by 3 on an accepted one.
inline std::pair<double, int> levenberg_descend(const GraphSystem& sys,
                                                Eigen::VectorXd& q, double tol,
                                                int max_iter) {
  Eigen::VectorXd f = sys.eval(q);
  double cost = 0.5 * f.squaredNorm();
  double lambda = 1e-3;
  int rejects_in_row = 0;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    if (f.cwiseAbs().maxCoeff() <= tol) break;
    Eigen::MatrixXd J = sys.jac(q);
    Eigen::VectorXd grad = J.transpose() * f;
    if (grad.cwiseAbs().maxCoeff() < 1e-16) break;
    Eigen::MatrixXd H = J.transpose() * J;
    H.diagonal().array() += lambda;
    Eigen::VectorXd delta = H.ldlt().solve(-grad);
    Eigen::VectorXd q_new = q + delta;
    Eigen::VectorXd f_new = sys.eval(q_new);
    double cost_new = 0.5 * f_new.squaredNorm();
    if (cost_new < cost) {
      q = std::move(q_new);
      f = std::move(f_new);
      cost = cost_new;
      lambda = std::max(lambda / 3.0, 1e-14);
      rejects_in_row = 0;
    } else {
      lambda *= 2.0;
      if (++rejects_in_row > 64 || lambda > 1e15) break;
    }
  }
  return {f.cwiseAbs().maxCoeff(), iter};
}

}  // namespace detail

/// Multi-start least-squares unit-distance embedding of g on S^2(r).
/// Initializations are uniform random sphere points on substream
/// (seed, start); the reported best is scheduling-independent (ties break
/// to the lowest start index). Failure to embed is soft: the method is
/// local and proves nothing about infeasibility.
inline GraphEmbedResult embed_graph(const Graph& g, double r,
                                    const EmbedOptions& opt = {}) {
  if (g.n() < 1) throw std::invalid_argument("embed_graph: empty graph");
  if (!(r > 0.5)) throw DegenerateInput("embed_graph: need r > 1/2");
  const detail::GraphSystem sys{g, r};
  const int n = g.n();
  const int n_guesses = static_cast<int>(opt.initial_guesses.size());
  const int total = n_guesses + std::max(opt.starts, 0);
  if (total == 0) throw std::invalid_argument("embed_graph: no starts");

  struct StartResult {
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
    Eigen::VectorXd q;
  };
  std::vector<StartResult> results(total);

  parallel_for(total, opt.workers, [&](int s) {
    Eigen::VectorXd q(3 * n);
    if (s < n_guesses) {
      const auto& guess = opt.initial_guesses[s];
      if (guess.size() != static_cast<size_t>(n))
        throw LengthMismatch("embed_graph: initial guess size mismatch");
      for (int v = 0; v < n; ++v) q.segment<3>(3 * v) = guess[v];
    } else {
      RngStream rng(opt.seed, static_cast<std::uint64_t>(s - n_guesses));
      for (int v = 0; v < n; ++v) {
        double z = r * (2.0 * rng.uniform01() - 1.0);
        double lon = 2.0 * std::numbers::pi * rng.uniform01();
        double s_xy = std::sqrt(std::max(r * r - z * z, 0.0));
        q.segment<3>(3 * v) = Vec3(s_xy * std::cos(lon), s_xy * std::sin(lon), z);
      }
    }
    auto [res, iters] = detail::levenberg_descend(sys, q, opt.tol, opt.max_iter);
    results[s] = {res, iters, std::move(q)};
  });

  int best = 0;
  for (int s = 1; s < total; ++s)
    if (results[s].residual < results[best].residual) best = s;

  GraphEmbedResult out;
  out.residual_norm = results[best].residual;
  out.iterations = results[best].iterations;
  out.best_start = best;
  out.success = out.residual_norm <= opt.success_residual;
  out.points.resize(n);
  for (int v = 0; v < n; ++v) out.points[v] = results[best].q.segment<3>(3 * v);
  return out;
}

struct InfeasibleAtUpper : std::domain_error {
  using std::domain_error::domain_error;
};

struct MinRadiusOptions {
  int starts = 200;
  std::uint64_t seed = 0;
  double tol_r = 1e-6;
  double feasible_residual = 1e-10;
  int max_iter = 400;
  int workers = 0;
  int grid_points = 25;  ///< interior scan when the upper end is infeasible
};

struct MinRadiusResult {
  double r_star = 0.0;
  GraphEmbedResult witness;
  int embed_calls = 0;
};

/// Smallest radius in [r_lo, r_hi] at which embed_graph succeeds, to within
/// tol_r; an upper bound on the true minimal radius (local method).
///
/// Plain bisection assumes the feasible set reaches up to r_hi. Rigid
/// graphs (K_4, whose only spherical unit realization is the regular
/// tetrahedron) are feasible on an isolated radius instead, so when r_hi
/// fails, a grid scan plus golden-section refinement of the best residual
/// locates a feasible radius first, and the bisection then closes in from
/// below.
inline MinRadiusResult min_radius_search(const Graph& g, double r_lo,
                                         double r_hi,
                                         const MinRadiusOptions& opt = {}) {
  if (!(r_lo < r_hi))
    throw std::invalid_argument("min_radius_search: need r_lo < r_hi");
  if (!(r_hi > 0.5))
    throw std::invalid_argument("min_radius_search: need r_hi > 1/2");

  int calls = 0;
  auto probe = [&](double r,
                   const std::vector<Vec3>* warm) -> GraphEmbedResult {
    if (!(r > 0.5)) {
      GraphEmbedResult res;  // no unit chords below r = 1/2
      return res;
    }
    EmbedOptions e;
    e.starts = opt.starts;
    e.seed = RngStream::derive(opt.seed, static_cast<std::uint64_t>(calls));
    e.success_residual = opt.feasible_residual;
    e.max_iter = opt.max_iter;
    e.workers = opt.workers;
    if (warm && !warm->empty()) e.initial_guesses.push_back(*warm);
    ++calls;
    return embed_graph(g, r, e);
  };
  auto rescale = [&](const GraphEmbedResult& w, double from_r,
                     double to_r) -> std::vector<Vec3> {
    std::vector<Vec3> pts = w.points;
    for (auto& p : pts) p *= to_r / from_r;
    return pts;
  };

  double hi = r_hi;
  GraphEmbedResult witness = probe(r_hi, nullptr);

  if (!witness.success) {
    // Interior search for any feasible radius.
    double best_r = r_hi;
    GraphEmbedResult best = witness;
    const int gp = std::max(opt.grid_points, 5);
    for (int i = 1; i < gp && !best.success; ++i) {
      double r = r_lo + (r_hi - r_lo) * i / gp;
      GraphEmbedResult res = probe(r, nullptr);
      if (res.residual_norm < best.residual_norm) {
        best = res;
        best_r = r;
      }
    }
    if (!best.success) {
      // Golden-section refinement of the residual minimum.
      double span = (r_hi - r_lo) / gp;
      double a = std::max(r_lo, best_r - span), b = std::min(r_hi, best_r + span);
      const double gold = 0.6180339887498949;
      for (int it = 0; it < 120 && (b - a) > 1e-12; ++it) {
        double x1 = b - gold * (b - a);
        double x2 = a + gold * (b - a);
        GraphEmbedResult f1 = probe(x1, nullptr);
        GraphEmbedResult f2 = probe(x2, nullptr);
        if (f1.residual_norm < best.residual_norm) { best = f1; best_r = x1; }
        if (f2.residual_norm < best.residual_norm) { best = f2; best_r = x2; }
        if (best.residual_norm <= 0.25 * opt.feasible_residual) break;
        if (f1.residual_norm <= f2.residual_norm) b = x2; else a = x1;
      }
    }
    if (!best.success)
      throw InfeasibleAtUpper(
          "min_radius_search: embed_graph failed at r_hi = " +
          std::to_string(r_hi) + " and no feasible radius was found in (" +
          std::to_string(r_lo) + ", " + std::to_string(r_hi) + ")");
    hi = best_r;
    witness = best;
  }

  double lo = r_lo;
  while (hi - lo > opt.tol_r) {
    double mid = 0.5 * (lo + hi);
    std::vector<Vec3> warm = rescale(witness, hi, mid);
    GraphEmbedResult res = probe(mid, &warm);
    if (res.success) {
      hi = mid;
      witness = res;
    } else {
      lo = mid;
    }
  }
  return {hi, witness, calls};
}

}  // namespace chromasphere
