#include "bsfr/wgplrt.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Cholesky>

#include "bsfr/errors.hpp"
#include "bsfr/rng.hpp"

namespace bsfr {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

struct Jets {
  Eigen::VectorXd g, dg, d2g, logdg, dlog, d2log;
};

Jets evaluate_jets(const WarpSpec& warp, const Eigen::VectorXd& v) {
  const Eigen::Index m = v.size();
  Jets j{Eigen::VectorXd(m), Eigen::VectorXd(m), Eigen::VectorXd(m),
         Eigen::VectorXd(m), Eigen::VectorXd(m), Eigen::VectorXd(m)};
  for (Eigen::Index i = 0; i < m; ++i) {
    const InverseJet e = warp.inverse_jet(v(i));
    j.g(i) = e.value;
    j.dg(i) = e.deriv;
    j.d2g(i) = e.second;
    j.logdg(i) = e.log_deriv;
    j.dlog(i) = e.dlog_deriv;
    j.d2log(i) = e.d2log_deriv;
  }
  return j;
}

bool all_in_range(const WarpSpec& warp, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!warp.in_range(v(i))) return false;
  }
  return true;
}

// Newton ascent on Q from one start point. Returns false if it did not reach
// the gradient tolerance.
bool newton_ascent(const WarpSpec& warp, const CholeskyFactor& k_chol, Eigen::VectorXd& v,
                   const LaplaceOptions& opt, int& iterations, double& grad_norm) {
  QDerivatives d = q_derivatives(warp, k_chol, v);
  const Eigen::Index m = v.size();
  for (iterations = 0; iterations < opt.max_iter; ++iterations) {
    grad_norm = d.gradient.lpNorm<Eigen::Infinity>();
    if (grad_norm <= opt.grad_tol) return true;

    Eigen::VectorXd step;
    double shift = 0.0;
    for (;;) {
      Eigen::LLT<Eigen::MatrixXd> llt(d.neg_hessian +
                                      shift * Eigen::MatrixXd::Identity(m, m));
      if (llt.info() == Eigen::Success) {
        step = llt.solve(d.gradient);
        if (step.allFinite()) break;
      }
      shift = shift == 0.0 ? 1e-8 : 2.0 * shift;
      if (shift > 1e12) return false;
    }

    const double slope = d.gradient.dot(step);
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      const Eigen::VectorXd cand = v + t * step;
      if (!all_in_range(warp, cand)) continue;
      const double qc = q_function(warp, k_chol, cand);
      if (std::isfinite(qc) && qc >= d.value + 1e-4 * t * slope) {
        v = cand;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      grad_norm = d.gradient.lpNorm<Eigen::Infinity>();
      return grad_norm <= opt.grad_tol;
    }
    d = q_derivatives(warp, k_chol, v);
  }
  grad_norm = d.gradient.lpNorm<Eigen::Infinity>();
  return grad_norm <= opt.grad_tol;
}

}  // namespace

double q_function(const WarpSpec& warp, const CholeskyFactor& k_chol, const Eigen::VectorXd& v) {
  if (v.size() != k_chol.size()) throw DomainError("q_function: dimension mismatch");
  Eigen::VectorXd g(v.size());
  double logdg = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const InverseJet e = warp.inverse_jet(v(i));
    g(i) = e.value;
    logdg += e.log_deriv;
  }
  const Eigen::VectorXd w = k_chol.lower.triangularView<Eigen::Lower>().solve(g);
  return -0.5 * w.squaredNorm() + logdg;
}

QDerivatives q_derivatives(const WarpSpec& warp, const CholeskyFactor& k_chol,
                           const Eigen::VectorXd& v) {
  if (v.size() != k_chol.size()) throw DomainError("q_derivatives: dimension mismatch");
  const Jets j = evaluate_jets(warp, v);
  const Eigen::VectorXd kinv_g = k_chol.solve(j.g);
  const Eigen::MatrixXd kinv =
      k_chol.solve(Eigen::MatrixXd(Eigen::MatrixXd::Identity(v.size(), v.size())));
  QDerivatives out;
  out.value = -0.5 * j.g.dot(kinv_g) + j.logdg.sum();
  out.gradient = -j.dg.cwiseProduct(kinv_g) + j.dlog;
  out.neg_hessian = j.dg.asDiagonal() * kinv * j.dg.asDiagonal();
  out.neg_hessian.diagonal() += j.d2g.cwiseProduct(kinv_g) - j.d2log;
  out.neg_hessian = 0.5 * (out.neg_hessian + out.neg_hessian.transpose()).eval();
  return out;
}

LaplaceCache laplace_fit(const TemporalModel& model, const std::vector<double>& times,
                         double sigma, const LaplaceOptions& options) {
  if (!(sigma > 0.0)) throw DomainError("laplace_fit: sigma must be positive");
  const WarpSpec& warp = model.warp;
  const CholeskyFactor k_chol = chol_with_jitter(gram(model.kernel, times));
  const auto m = static_cast<Eigen::Index>(times.size());

  LaplaceCache cache;
  cache.sigma = sigma;
  Eigen::VectorXd v = Eigen::VectorXd::Constant(m, warp.forward(0.0));
  bool converged = newton_ascent(warp, k_chol, v, options, cache.iterations, cache.grad_norm);
  RngStream rng(options.seed, stream_key(StreamTag::kLaplaceRestart, {static_cast<std::uint64_t>(m)}));
  for (int r = 0; !converged && r < options.restarts; ++r) {
    for (Eigen::Index i = 0; i < m; ++i) v(i) = warp.forward(options.restart_sd * rng.normal());
    converged = newton_ascent(warp, k_chol, v, options, cache.iterations, cache.grad_norm);
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "Laplace fit did not converge (gradient norm " << cache.grad_norm << " after "
        << options.restarts << " restarts)";
    throw NonConvergence(msg.str());
  }

  const QDerivatives d = q_derivatives(warp, k_chol, v);
  cache.v_hat = v;
  cache.a = d.neg_hessian;
  cache.q_at_vhat = d.value;
  cache.logdet_k = k_chol.log_det();

  Eigen::LLT<Eigen::MatrixXd> a_llt(cache.a);
  if (a_llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("Laplace fit: negative Hessian of Q is not positive definite");
  }

  // With N = D + s I (D the diagonal part of A beyond J K^-1 J, s = sigma^-2)
  // and M = K + J N^-1 J:
  //   log det K + log det(A + s I) = log det N + log det M
  //   (A^-1 + sigma^2 I)^-1 = diag(s D / N) + s^2 N^-1 J M^-1 J N^-1
  // which avoids forming K^-1 when K is ill conditioned.
  const double s = 1.0 / (sigma * sigma);
  const Jets j = evaluate_jets(warp, v);
  const Eigen::VectorXd kinv_g = k_chol.solve(j.g);
  const Eigen::VectorXd dvec = j.d2g.cwiseProduct(kinv_g) - j.d2log;
  const Eigen::VectorXd nvec = dvec.array() + s;
  double logdet_sum = 0.0;
  if ((nvec.array() > 0.0).all()) {
    const Eigen::VectorXd jn = j.dg.cwiseQuotient(nvec);  // J N^-1
    Eigen::MatrixXd mmat = gram(model.kernel, times);
    mmat.diagonal() += j.dg.cwiseProduct(jn);
    mmat.diagonal().array() += k_chol.jitter;
    Eigen::LLT<Eigen::MatrixXd> m_llt(mmat);
    if (m_llt.info() != Eigen::Success) {
      throw NotPositiveDefinite("Laplace fit: K + J N^-1 J is not positive definite");
    }
    const Eigen::MatrixXd lm = m_llt.matrixL();
    logdet_sum = nvec.array().log().sum() + 2.0 * lm.diagonal().array().log().sum();
    const Eigen::MatrixXd jn_diag = jn.asDiagonal();
    cache.precision = s * s * (jn_diag * m_llt.solve(jn_diag));
    cache.precision.diagonal() += s * dvec.cwiseQuotient(nvec);
  } else {
    Eigen::MatrixXd b = cache.a;
    b.diagonal().array() += s;
    Eigen::LLT<Eigen::MatrixXd> b_llt(b);
    if (b_llt.info() != Eigen::Success) {
      throw NotPositiveDefinite("Laplace fit: A + sigma^-2 I is not positive definite");
    }
    const Eigen::MatrixXd lb = b_llt.matrixL();
    logdet_sum = cache.logdet_k + 2.0 * lb.diagonal().array().log().sum();
    cache.precision = s * b_llt.solve(cache.a);
  }
  cache.precision = 0.5 * (cache.precision + cache.precision.transpose()).eval();
  cache.logdet_a_plus = logdet_sum - cache.logdet_k;
  cache.log_c_hat = -0.5 * logdet_sum - 0.5 * static_cast<double>(m) * kLog2Pi -
                    static_cast<double>(m) * std::log(sigma) + cache.q_at_vhat;
  return cache;
}

double approx_log_likelihood(const LaplaceCache& cache, const Eigen::VectorXd& z) {
  if (z.size() != cache.dim()) throw DomainError("approx_log_likelihood: dimension mismatch");
  const Eigen::VectorXd d = z - cache.v_hat;
  return cache.log_c_hat - 0.5 * d.dot(cache.precision * d);
}

double wgplrt_statistic(const LaplaceCache& cache0, const LaplaceCache& cache1,
                        const Eigen::VectorXd& z) {
  if (z.size() != cache0.dim() || z.size() != cache1.dim()) {
    throw DomainError("wgplrt_statistic: dimension mismatch");
  }
  const Eigen::VectorXd d0 = z - cache0.v_hat;
  const Eigen::VectorXd d1 = z - cache1.v_hat;
  const double constant =
      0.5 * (cache0.logdet_a_plus + cache0.logdet_k - 2.0 * cache0.q_at_vhat -
             cache1.logdet_a_plus - cache1.logdet_k + 2.0 * cache1.q_at_vhat) +
      static_cast<double>(z.size()) * (std::log(cache0.sigma) - std::log(cache1.sigma));
  return constant + 0.5 * d0.dot(cache0.precision * d0) - 0.5 * d1.dot(cache1.precision * d1);
}

WgplrtDetector::WgplrtDetector(const TemporalModel& h0, const TemporalModel& h1,
                               const std::vector<double>& times, double sigma,
                               const LaplaceOptions& options)
    : cache0_(laplace_fit(h0, times, sigma, options)),
      cache1_(laplace_fit(h1, times, sigma, options)) {}

WgplrtDetector::WgplrtDetector(LaplaceCache cache0, LaplaceCache cache1)
    : cache0_(std::move(cache0)), cache1_(std::move(cache1)) {
  if (cache0_.dim() != cache1_.dim()) throw DomainError("WgplrtDetector: cache dimensions differ");
}

}  // namespace bsfr
