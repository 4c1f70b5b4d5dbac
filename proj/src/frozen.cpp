#include "msbl/frozen.hpp"

#include <cmath>
#include <stdexcept>

#include "msbl/simd.hpp"

namespace msbl {

FrozenStepper::FrozenStepper(const ModelSpec& model, std::size_t m, double h)
    : model_(&model), m_(m), h_(h), decay_(m), phi_(m), sd_(m), sub_decay_(m), sub_sd_(m),
      drive_(m), noise_(m), z_(m), ws_(m) {
    if (!(h > 0.0)) throw std::invalid_argument("frozen step: dt must be positive");
    for (std::size_t k = 1; k <= m; ++k) {
        const double lam = laplace_eigenvalue(k);
        decay_[k - 1] = std::exp(-lam * h);
        phi_[k - 1] = -std::expm1(-lam * h) / lam;
        sd_[k - 1] = convolution_stddev(model.q2, k, h);
    }
}

void FrozenStepper::freeze(std::span<const double> x) { ws_.set_x(x); }

void FrozenStepper::add_noise(std::span<double> y, const NoiseStream& stream, unsigned refine,
                              double sign) {
    if (model_->q2.is_zero()) return;
    if (refine <= 1) {
        standard_normals(stream, z_);
        for (std::size_t i = 0; i < m_; ++i) y[i] += sign * sd_[i] * z_[i];
        return;
    }
    if (refine != sub_refine_) {
        const double sub = h_ / refine;
        for (std::size_t k = 1; k <= m_; ++k) {
            sub_decay_[k - 1] = std::exp(-laplace_eigenvalue(k) * sub);
            sub_sd_[k - 1] = convolution_stddev(model_->q2, k, sub);
        }
        sub_refine_ = refine;
    }
    // sum_j e^{(h - (j+1) sub) A} c_j, accumulated Horner-style.
    std::fill(noise_.begin(), noise_.end(), 0.0);
    for (unsigned j = 0; j < refine; ++j) {
        standard_normals(stream.at(stream.step * refine + j), z_);
        for (std::size_t i = 0; i < m_; ++i) noise_[i] = sub_decay_[i] * noise_[i] + sub_sd_[i] * z_[i];
    }
    for (std::size_t i = 0; i < m_; ++i) y[i] += sign * noise_[i];
}

void FrozenStepper::step(std::span<double> y, const NoiseStream& stream, unsigned refine,
                         double sign) {
    ws_.apply(model_->g_fast, y, drive_);
    simd::active().exp_euler(decay_.data(), y.data(), phi_.data(), drive_.data(), nullptr, y.data(), m_);
    add_noise(y, stream, refine, sign);
}

SineField frozen_step(const ModelSpec& model, const SineField& x_frozen, const SineField& y,
                      double dt, const NoiseStream& stream) {
    if (x_frozen.modes() != y.modes()) throw std::invalid_argument("frozen_step: mode counts differ");
    FrozenStepper st(model, y.modes(), dt);
    st.freeze(x_frozen.coeffs());
    SineField out = y;
    st.step(out.coeffs(), stream);
    return out;
}

double default_burn_in(const ModelSpec& model) {
    return 10.0 / (laplace_eigenvalue(1) - model.L_G);
}

FbarEstimate estimate_fbar_ergodic(const ModelSpec& model, const SineField& x, double burn_in,
                                   double window, double micro_dt, const NoiseStream& stream) {
    if (!(burn_in >= 0.0) || !(window > 0.0) || !(micro_dt > 0.0))
        throw std::invalid_argument("estimate_fbar_ergodic: burn_in, window, micro_dt must be positive");
    constexpr std::size_t kBatches = 20;
    if (window < kBatches * micro_dt)
        throw std::invalid_argument("estimate_fbar_ergodic: window shorter than 20 micro steps");

    const std::size_t m = x.modes();
    FrozenStepper st(model, m, micro_dt);
    st.freeze(x.coeffs());
    auto& ws = st.workspace();

    const auto n_burn = static_cast<std::size_t>(std::llround(burn_in / micro_dt));
    const auto n_win = static_cast<std::size_t>(std::llround(window / micro_dt));

    std::vector<double> y(m, 0.0), f(m);
    std::uint64_t addr = stream.step;
    for (std::size_t i = 0; i < n_burn; ++i) st.step(y, stream.at(addr++));

    std::vector<std::vector<double>> batch(kBatches, std::vector<double>(m, 0.0));
    std::vector<std::size_t> batch_len(kBatches, 0);
    for (std::size_t i = 0; i < n_win; ++i) {
        st.step(y, stream.at(addr++));
        ws.apply(model.f_slow, y, f);
        const std::size_t b = i * kBatches / n_win;
        simd::active().axpy(1.0, f.data(), batch[b].data(), m);
        ++batch_len[b];
    }

    FbarEstimate est{x, SineField(m), burn_in, window, micro_dt, kBatches, std::vector<double>(m, 0.0)};
    std::vector<double> means(kBatches);
    for (std::size_t k = 0; k < m; ++k) {
        double total = 0.0;
        for (std::size_t b = 0; b < kBatches; ++b) {
            total += batch[b][k];
            means[b] = batch[b][k] / static_cast<double>(batch_len[b]);
        }
        const double mean = total / static_cast<double>(n_win);
        double ss = 0.0;
        for (double v : means) ss += (v - mean) * (v - mean);
        est.value[k] = mean;
        est.std_err[k] = std::sqrt(ss / (kBatches - 1) / kBatches);
    }
    return est;
}

SineField frozen_invariant_mean(const ModelSpec& model, const SineField& x) {
    const LinearGaussian& lg = model.linear();
    const std::size_t m = x.modes();
    NemytskiiWorkspace ws(m);
    ws.set_x(x.coeffs());
    SineField mu(m);
    ws.apply_unary(lg.g1, mu.coeffs());
    for (std::size_t k = 1; k <= m; ++k) mu[k - 1] /= laplace_eigenvalue(k) + lg.a;
    return mu;
}

SineField fbar_analytic(const ModelSpec& model, const SineField& x) {
    const LinearGaussian& lg = model.linear();
    const std::size_t m = x.modes();
    NemytskiiWorkspace ws(m);
    ws.set_x(x.coeffs());
    SineField out(m), g0(m);
    ws.apply_unary(lg.f1, out.coeffs());
    ws.apply_unary(lg.g1, g0.coeffs());
    for (std::size_t k = 1; k <= m; ++k) out[k - 1] += lg.c * g0[k - 1] / (laplace_eigenvalue(k) + lg.a);
    return out;
}

SineField poisson_corrector_linear(const ModelSpec& model, const SineField& x, const SineField& y) {
    const LinearGaussian& lg = model.linear();
    if (x.modes() != y.modes()) throw std::invalid_argument("poisson_corrector_linear: mode counts differ");
    SineField phi = y - frozen_invariant_mean(model, x);
    for (std::size_t k = 1; k <= phi.modes(); ++k) phi[k - 1] *= lg.c / (laplace_eigenvalue(k) + lg.a);
    return phi;
}

SineField poisson_corrector_quadrature(const ModelSpec& model, const SineField& x,
                                       const SineField& y, double t_max, std::size_t n_paths,
                                       double micro_dt, const NoiseStream& stream,
                                       const CorrectorOptions& opts) {
    if (!(t_max > 0.0) || n_paths == 0 || !(micro_dt > 0.0))
        throw std::invalid_argument("poisson_corrector_quadrature: t_max, n_paths, micro_dt must be positive");
    if (x.modes() != y.modes()) throw std::invalid_argument("poisson_corrector_quadrature: mode counts differ");
    const std::size_t m = x.modes();

    SineField fbar(m);
    if (opts.fbar) {
        fbar = *opts.fbar;
    } else if (model.is_linear_gaussian()) {
        fbar = fbar_analytic(model, x);
    } else {
        fbar = estimate_fbar_ergodic(model, x, default_burn_in(model), 200.0, micro_dt,
                                     {stream.master_seed, stream.path_id, Channel::W2, 1ull << 40})
                   .value;
    }

    FrozenStepper st(model, m, micro_dt);
    st.freeze(x.coeffs());
    auto& ws = st.workspace();
    const auto n_steps = static_cast<std::size_t>(std::llround(t_max / micro_dt));

    // Path-major accumulation with fixed order keeps the result reproducible.
    std::vector<double> total(m, 0.0), path_sum(m), yv(m), f(m);
    auto accumulate = [&](double w) {
        ws.apply(model.f_slow, yv, f);
        for (std::size_t k = 0; k < m; ++k) path_sum[k] += w * (f[k] - fbar[k]);
    };
    NoiseStream s = stream;
    s.channel = Channel::W2;
    for (std::size_t p = 0; p < n_paths; ++p) {
        const bool mirrored = opts.antithetic && (p % 2 == 1);
        s.path_id = stream.path_id + static_cast<std::uint32_t>(opts.antithetic ? p / 2 : p);
        std::copy(y.coeffs().begin(), y.coeffs().end(), yv.begin());
        std::fill(path_sum.begin(), path_sum.end(), 0.0);
        accumulate(0.5);
        for (std::size_t i = 0; i < n_steps; ++i) {
            st.step(yv, s.at(stream.step + i), 1, mirrored ? -1.0 : 1.0);
            accumulate(i + 1 == n_steps ? 0.5 : 1.0);
        }
        for (std::size_t k = 0; k < m; ++k) total[k] += path_sum[k];
    }
    SineField out(m);
    for (std::size_t k = 0; k < m; ++k) out[k] = total[k] * micro_dt / static_cast<double>(n_paths);
    return out;
}

}  // namespace msbl
