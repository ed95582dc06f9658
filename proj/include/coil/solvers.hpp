#pragma once

#include "coil/denoise.hpp"
#include "coil/errors.hpp"
#include "coil/image.hpp"
#include "coil/radon.hpp"
#include "coil/rng.hpp"
#include "coil/tv.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace coil {

/// Blended data term: (1-alpha) on the measured sinogram y with operator A,
/// alpha on the synthesized CoIL field with its own (usually denser)
/// geometry.
template <typename Scalar>
struct DataFidelity {
    Sinogram<Scalar> measured;
    std::optional<Sinogram<Scalar>> coil;
    Scalar alpha = Scalar(0);

    void validate() const {
        measured.validate();
        if (coil) coil->validate();
        if (alpha < Scalar(0) || alpha > Scalar(1))
            throw std::invalid_argument("DataFidelity: alpha must lie in [0, 1]");
        if (!coil && alpha != Scalar(0))
            throw std::invalid_argument("DataFidelity: alpha must be 0 without a CoIL field");
    }
};

enum class Algorithm { fista_tv, gm_red, pnp_fista };

/// Knobs for the iterative solvers. Each algorithm consults only the
/// fields relevant to it: tv_weight for fista_tv, red_weight and denoiser
/// for gm_red, denoiser for pnp_fista.
template <typename Scalar>
struct SolverConfig {
    Algorithm algorithm = Algorithm::fista_tv;
    Scalar step_size = Scalar(1);
    Scalar tv_weight = Scalar(0);
    Scalar red_weight = Scalar(0);
    DenoiserSpec denoiser;
    int max_iters = 200;
    Scalar stop_tol = Scalar(1e-6);

    void validate() const {
        if (!(step_size > Scalar(0)))
            throw std::invalid_argument("SolverConfig: step_size must be positive");
        if (tv_weight < Scalar(0) || red_weight < Scalar(0))
            throw std::invalid_argument("SolverConfig: weights must be nonnegative");
        if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
        if (stop_tol < Scalar(0))
            throw std::invalid_argument("SolverConfig: stop_tol must be nonnegative");
    }
};

/// Gradient of the blended least-squares data term:
/// (1-alpha) A^T(Ax - y) + alpha At^T(At x - yt).
template <typename Scalar>
Image<Scalar> grad_data(const DataFidelity<Scalar>& fidelity, const Image<Scalar>& x) {
    fidelity.validate();
    if (x.side() <= 0) throw std::invalid_argument("grad_data: empty image");
    Image<Scalar> grad(x.side(), x.pixel_size);
    if (fidelity.alpha < Scalar(1)) {
        Sinogram<Scalar> residual = radon_forward(x, fidelity.measured.geometry);
        if (residual.responses.rows() != fidelity.measured.responses.rows() ||
            residual.responses.cols() != fidelity.measured.responses.cols())
            throw std::invalid_argument("grad_data: measured sinogram shape mismatch");
        residual.responses -= fidelity.measured.responses;
        grad.pixels +=
            (Scalar(1) - fidelity.alpha) * radon_adjoint(residual, x.side(), x.pixel_size).pixels;
    }
    if (fidelity.coil && fidelity.alpha > Scalar(0)) {
        Sinogram<Scalar> residual = radon_forward(x, fidelity.coil->geometry);
        residual.responses -= fidelity.coil->responses;
        grad.pixels += fidelity.alpha * radon_adjoint(residual, x.side(), x.pixel_size).pixels;
    }
    return grad;
}

/// Blended least-squares objective value (without any regularizer).
template <typename Scalar>
Scalar data_objective(const DataFidelity<Scalar>& fidelity, const Image<Scalar>& x) {
    Scalar f = Scalar(0);
    if (fidelity.alpha < Scalar(1)) {
        const auto ax = radon_forward(x, fidelity.measured.geometry);
        f += (Scalar(1) - fidelity.alpha) * Scalar(0.5) *
             (ax.responses - fidelity.measured.responses).squaredNorm();
    }
    if (fidelity.coil && fidelity.alpha > Scalar(0)) {
        const auto ax = radon_forward(x, fidelity.coil->geometry);
        f += fidelity.alpha * Scalar(0.5) * (ax.responses - fidelity.coil->responses).squaredNorm();
    }
    return f;
}

namespace detail {

/// Applies the blended normal operator (1-a) A^T A + a At^T At.
template <typename Scalar>
Image<Scalar> normal_apply(const DataFidelity<Scalar>& fidelity, const Image<Scalar>& x) {
    Image<Scalar> out(x.side(), x.pixel_size);
    if (fidelity.alpha < Scalar(1)) {
        const auto ax = radon_forward(x, fidelity.measured.geometry);
        out.pixels += (Scalar(1) - fidelity.alpha) *
                      radon_adjoint(ax, x.side(), x.pixel_size).pixels;
    }
    if (fidelity.coil && fidelity.alpha > Scalar(0)) {
        const auto ax = radon_forward(x, fidelity.coil->geometry);
        out.pixels += fidelity.alpha * radon_adjoint(ax, x.side(), x.pixel_size).pixels;
    }
    return out;
}

/// FISTA acceleration parameter: q+ = (1 + sqrt(1 + 4 q^2)) / 2.
template <typename Scalar>
Scalar next_q(Scalar q) {
    return Scalar(0.5) * (Scalar(1) + std::sqrt(Scalar(1) + Scalar(4) * q * q));
}

template <typename Scalar>
Scalar relative_change(const Image<Scalar>& next, const Image<Scalar>& prev) {
    const Scalar denom = std::max(prev.pixels.norm(), Scalar(1e-12));
    return (next.pixels - prev.pixels).norm() / denom;
}

} // namespace detail

/// Largest-eigenvalue estimate of the blended normal operator by power
/// iteration from a fixed seeded start; 1/estimate is a safe step size.
template <typename Scalar>
Scalar power_iteration(const DataFidelity<Scalar>& fidelity, Eigen::Index side, int iters,
                       Scalar pixel_size = Scalar(1)) {
    fidelity.validate();
    if (iters < 10) throw std::invalid_argument("power_iteration: iters must be >= 10");
    Rng rng(0x706F776572ull); // fixed start so estimates are reproducible
    Image<Scalar> u(side, pixel_size);
    for (Eigen::Index i = 0; i < u.size(); ++i)
        u.data()[i] = static_cast<Scalar>(rng.gaussian());
    u.pixels /= u.pixels.norm();
    Scalar estimate = Scalar(0);
    for (int it = 0; it < iters; ++it) {
        Image<Scalar> w = detail::normal_apply(fidelity, u);
        estimate = (u.pixels.array() * w.pixels.array()).sum(); // Rayleigh quotient
        const Scalar norm = w.pixels.norm();
        if (norm == Scalar(0)) return Scalar(0);
        u.pixels = w.pixels / norm;
    }
    return estimate;
}

/// FISTA with an isotropic-TV proximal step on the blended data term.
/// Returns the last iterate and the objective value per iteration
/// (including the starting point).
template <typename Scalar>
std::pair<Image<Scalar>, std::vector<Scalar>> fista_tv(const DataFidelity<Scalar>& fidelity,
                                                       const SolverConfig<Scalar>& config,
                                                       const Image<Scalar>& x0) {
    fidelity.validate();
    config.validate();
    const Scalar gamma = config.step_size;
    const Scalar tau = config.tv_weight;
    auto objective = [&](const Image<Scalar>& x) {
        return data_objective(fidelity, x) + (tau > Scalar(0) ? tv_value(x, tau) : Scalar(0));
    };
    Image<Scalar> x = x0;
    Image<Scalar> s = x0;
    Scalar q = Scalar(1);
    std::vector<Scalar> history{objective(x0)};
    const Scalar guard = Scalar(1e3) * (std::abs(history[0]) + Scalar(1));
    for (int it = 0; it < config.max_iters; ++it) {
        const Image<Scalar> grad = grad_data(fidelity, s);
        Image<Scalar> z(x.side(), x.pixel_size);
        z.pixels = s.pixels - gamma * grad.pixels;
        Image<Scalar> x_next = tau > Scalar(0) ? tv_prox(z, gamma * tau) : std::move(z);
        const Scalar q_next = detail::next_q(q);
        const Scalar momentum = (q_next - Scalar(1)) / q_next;
        s.pixels = x_next.pixels + momentum * (x_next.pixels - x.pixels);
        const Scalar change = detail::relative_change(x_next, x);
        x = std::move(x_next);
        q = q_next;
        history.push_back(objective(x));
        if (!(history.back() < guard))
            throw solver_diverged("fista_tv: objective exploded at iteration " +
                                  std::to_string(it) + "; try a smaller step_size");
        if (change < config.stop_tol) break;
    }
    return {std::move(x), std::move(history)};
}

/// Gradient-method RED: x+ = x - gamma [ grad_data(x) + tau (x - D(x)) ].
/// residual_history records the norm of the bracketed direction.
template <typename Scalar>
std::pair<Image<Scalar>, std::vector<Scalar>> gm_red(const DataFidelity<Scalar>& fidelity,
                                                     const SolverConfig<Scalar>& config,
                                                     const Image<Scalar>& x0) {
    fidelity.validate();
    config.validate();
    config.denoiser.validate();
    const Scalar gamma = config.step_size;
    const Scalar tau = config.red_weight;
    Image<Scalar> x = x0;
    std::vector<Scalar> history;
    history.reserve(static_cast<std::size_t>(config.max_iters));
    for (int it = 0; it < config.max_iters; ++it) {
        Image<Scalar> direction = grad_data(fidelity, x);
        if (tau > Scalar(0)) {
            const Image<Scalar> dx = denoise(config.denoiser, x);
            direction.pixels += tau * (x.pixels - dx.pixels);
        }
        const Scalar residual = direction.pixels.norm();
        history.push_back(residual);
        if (residual > Scalar(1e3) * (history.front() + Scalar(1e-30)))
            throw solver_diverged("gm_red: residual exploded at iteration " + std::to_string(it) +
                                  "; try a smaller step_size");
        x.pixels -= gamma * direction.pixels;
        const Scalar denom = std::max(x.pixels.norm(), Scalar(1e-12));
        if (gamma * residual / denom < config.stop_tol) break;
    }
    return {std::move(x), std::move(history)};
}

/// PnP-FISTA: the proximal step is replaced by the plug-in denoiser,
/// momentum follows the same q-sequence as fista_tv.
template <typename Scalar>
Image<Scalar> pnp_fista(const DataFidelity<Scalar>& fidelity, const SolverConfig<Scalar>& config,
                        const Image<Scalar>& x0) {
    fidelity.validate();
    config.validate();
    config.denoiser.validate();
    const Scalar gamma = config.step_size;
    Image<Scalar> x = x0;
    Image<Scalar> s = x0;
    Scalar q = Scalar(1);
    const Scalar guard = Scalar(1e3) * (data_objective(fidelity, x0) + Scalar(1));
    for (int it = 0; it < config.max_iters; ++it) {
        const Image<Scalar> grad = grad_data(fidelity, s);
        Image<Scalar> z(x.side(), x.pixel_size);
        z.pixels = s.pixels - gamma * grad.pixels;
        Image<Scalar> x_next = denoise(config.denoiser, z);
        const Scalar q_next = detail::next_q(q);
        const Scalar momentum = (q_next - Scalar(1)) / q_next;
        s.pixels = x_next.pixels + momentum * (x_next.pixels - x.pixels);
        const Scalar change = detail::relative_change(x_next, x);
        x = std::move(x_next);
        q = q_next;
        if (!(data_objective(fidelity, x) < guard))
            throw solver_diverged("pnp_fista: data term exploded at iteration " +
                                  std::to_string(it) + "; try a smaller step_size");
        if (change < config.stop_tol) break;
    }
    return x;
}

} // namespace coil
