#include "msbl/integrators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "msbl/simd.hpp"

namespace msbl {

void SimParams::validate() const {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("SimParams: eps must be positive");
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("SimParams: T must be positive");
    if (!(macro_dt > 0.0) || macro_dt > T)
        throw std::invalid_argument("SimParams: macro_dt must lie in (0, T]");
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("SimParams: kappa must be positive");
    if (m == 0) throw std::invalid_argument("SimParams: m must be >= 1");
    if (noise_refine == 0) throw std::invalid_argument("SimParams: noise_refine must be >= 1");
    const double steps = T / macro_dt;
    if (std::abs(steps - std::round(steps)) > 1e-9 * steps)
        throw std::invalid_argument("SimParams: T must be an integer multiple of macro_dt");
}

std::size_t SimParams::n_steps() const { return static_cast<std::size_t>(std::llround(T / macro_dt)); }

std::size_t SimParams::n_sub() const {
    if (n_sub_override > 0) return n_sub_override;
    const double n = std::ceil(macro_dt / (kappa * eps) - 1e-12);
    if (!(n <= 1e7))
        throw std::invalid_argument("fast substep count " + std::to_string(n) +
                                    " exceeds 10^7; shrink macro_dt or raise kappa");
    return std::max<std::size_t>(1, static_cast<std::size_t>(n));
}

namespace {

void slow_factors(const CovSpec& q1, std::size_t m, double dt, unsigned refine,
                  std::vector<double>& decay, std::vector<double>& phi, std::vector<double>& sd,
                  std::vector<double>& sub_decay, std::vector<double>& sub_sd) {
    decay.resize(m);
    phi.resize(m);
    sd.resize(m);
    sub_decay.resize(m);
    sub_sd.resize(m);
    for (std::size_t k = 1; k <= m; ++k) {
        const double lam = laplace_eigenvalue(k);
        decay[k - 1] = std::exp(-lam * dt);
        phi[k - 1] = -std::expm1(-lam * dt) / lam;
        sd[k - 1] = convolution_stddev(q1, k, dt);
        sub_decay[k - 1] = std::exp(-lam * dt / refine);
        sub_sd[k - 1] = convolution_stddev(q1, k, dt / refine);
    }
}

}  // namespace

void add_slow_noise(const CovSpec& q1, std::span<double> x, const NoiseStream& w1,
                    std::uint64_t macro_index, unsigned refine, std::span<const double> sd,
                    std::span<const double> sub_decay, std::span<const double> sub_sd,
                    std::span<double> scratch, std::span<double> z) {
    if (q1.is_zero()) return;
    const std::size_t m = x.size();
    if (refine <= 1) {
        standard_normals(w1.at(macro_index), z);
        for (std::size_t i = 0; i < m; ++i) x[i] += sd[i] * z[i];
        return;
    }
    std::fill(scratch.begin(), scratch.end(), 0.0);
    for (unsigned j = 0; j < refine; ++j) {
        standard_normals(w1.at(macro_index * refine + j), z);
        for (std::size_t i = 0; i < m; ++i) scratch[i] = sub_decay[i] * scratch[i] + sub_sd[i] * z[i];
    }
    for (std::size_t i = 0; i < m; ++i) x[i] += scratch[i];
}

namespace {
SimParams checked(const SimParams& p) {
    p.validate();
    return p;
}
}  // namespace

CoupledStepper::CoupledStepper(const ModelSpec& model, const SimParams& params, std::uint32_t path_id)
    : model_(&model), params_(checked(params)), m_(params.m), n_sub_(params.n_sub()),
      w1_{params.master_seed, path_id, Channel::W1, 0}, w2_{params.master_seed, path_id, Channel::W2, 0},
      drive_(m_), fbuf_(m_), burgers_(m_), noise_(m_), z_(m_), ymid_(m_),
      fast_(model, m_, params.macro_dt / static_cast<double>(n_sub_) / params.eps) {
    slow_factors(model.q1, m_, params.macro_dt, params.noise_refine, decay_, phi_, sd_, sub_decay_, sub_sd_);
}

void CoupledStepper::step(std::span<double> x, std::span<double> y, std::uint64_t macro_index) {
    const auto& K = simd::active();
    fast_.freeze(x);
    auto& ws = fast_.workspace();
    const bool average = params_.drive == SlowDrive::substep_average;
    const double w = 1.0 / static_cast<double>(n_sub_);
    const std::size_t half = n_sub_ / 2;

    std::fill(drive_.begin(), drive_.end(), 0.0);
    if (average) {
        ws.apply(model_->f_slow, y, fbuf_);
        K.axpy(0.5 * w, fbuf_.data(), drive_.data(), m_);
    } else if (half == 0) {
        std::copy(y.begin(), y.end(), ymid_.begin());
    }
    for (std::size_t s = 0; s < n_sub_; ++s) {
        fast_.step(y, w2_.at(macro_index * n_sub_ + s), params_.noise_refine);
        if (average) {
            ws.apply(model_->f_slow, y, fbuf_);
            K.axpy(s + 1 == n_sub_ ? 0.5 * w : w, fbuf_.data(), drive_.data(), m_);
        } else if (s + 1 == half) {
            std::copy(y.begin(), y.end(), ymid_.begin());
        }
    }
    if (!average) ws.apply(model_->f_slow, ymid_, drive_);

    detail::bilinear_coeffs(x, x, burgers_);
    K.axpy(1.0, burgers_.data(), drive_.data(), m_);
    K.exp_euler(decay_.data(), x.data(), phi_.data(), drive_.data(), nullptr, x.data(), m_);
    add_slow_noise(model_->q1, x, w1_, macro_index, params_.noise_refine, sd_, sub_decay_, sub_sd_,
                   noise_, z_);
}

AveragedStepper::AveragedStepper(const ModelSpec& model, const SimParams& params, FbarMode mode,
                                 std::uint32_t path_id)
    : model_(&model), params_(checked(params)), mode_(std::move(mode)), m_(params.m),
      w1_{params.master_seed, path_id, Channel::W1, 0}, drive_(m_), fb_(m_), g0_(m_), burgers_(m_),
      noise_(m_), z_(m_), ws_(m_) {
    if (std::holds_alternative<FbarAnalytic>(mode_)) {
        (void)model.linear();
    } else if (const auto* t = std::get_if<FbarTable>(&mode_); t && t->entries.empty()) {
        throw std::invalid_argument("averaged equation: ergodic table is empty");
    }
    slow_factors(model.q1, m_, params.macro_dt, params.noise_refine, decay_, phi_, sd_, sub_decay_, sub_sd_);
}

void AveragedStepper::fbar(std::span<const double> x, std::span<double> out, std::uint64_t macro_index) {
    if (std::holds_alternative<FbarAnalytic>(mode_)) {
        const LinearGaussian& lg = model_->linear();
        ws_.set_x(x);
        ws_.apply_unary(lg.f1, out);
        ws_.apply_unary(lg.g1, g0_);
        for (std::size_t k = 1; k <= m_; ++k)
            out[k - 1] += lg.c * g0_[k - 1] / (laplace_eigenvalue(k) + lg.a);
    } else if (const auto* t = std::get_if<FbarTable>(&mode_)) {
        const FbarEstimate* best = nullptr;
        double best_d = std::numeric_limits<double>::infinity();
        for (const auto& e : t->entries) {
            double d = 0.0;
            for (std::size_t k = 0; k < m_; ++k) {
                const double ek = k < e.x.modes() ? e.x[k] : 0.0;
                d += (x[k] - ek) * (x[k] - ek);
            }
            if (d < best_d) {
                best_d = d;
                best = &e;
            }
        }
        for (std::size_t k = 0; k < m_; ++k) out[k] = k < best->value.modes() ? best->value[k] : 0.0;
    } else {
        const auto& on = std::get<FbarOnline>(mode_);
        SineField xs(std::vector<double>(x.begin(), x.end()));
        const double burn = on.burn_in > 0.0 ? on.burn_in : default_burn_in(*model_);
        NoiseStream s{w1_.master_seed, w1_.path_id, Channel::W2, (macro_index + 1) << 32};
        const auto est = estimate_fbar_ergodic(*model_, xs, burn, on.window, on.micro_dt, s);
        std::copy(est.value.coeffs().begin(), est.value.coeffs().end(), out.begin());
    }
}

void AveragedStepper::step(std::span<double> x, std::uint64_t macro_index) {
    const auto& K = simd::active();
    fbar(x, drive_, macro_index);
    detail::bilinear_coeffs(x, x, burgers_);
    K.axpy(1.0, burgers_.data(), drive_.data(), m_);
    K.exp_euler(decay_.data(), x.data(), phi_.data(), drive_.data(), nullptr, x.data(), m_);
    add_slow_noise(model_->q1, x, w1_, macro_index, params_.noise_refine, sd_, sub_decay_, sub_sd_,
                   noise_, z_);
}

std::pair<Trajectory, Trajectory> simulate_coupled(const SineField& x0, const SineField& y0,
                                                   const ModelSpec& model, const SimParams& params,
                                                   std::uint32_t path_id) {
    CoupledStepper st(model, params, path_id);
    SineField x = x0.resized(params.m), y = y0.resized(params.m);
    const std::size_t n = params.n_steps();
    Trajectory slow, fast;
    slow.kind = TrajectoryKind::slow_eps;
    fast.kind = TrajectoryKind::fast_eps;
    slow.times.reserve(n + 1);
    fast.times.reserve(n + 1);
    slow.times.push_back(0.0);
    fast.times.push_back(0.0);
    slow.states.push_back(x);
    fast.states.push_back(y);
    for (std::size_t i = 0; i < n; ++i) {
        st.step(x.coeffs(), y.coeffs(), i);
        if (!x.all_finite() || !y.all_finite())
            throw std::domain_error("simulate_coupled: state blew up at step " + std::to_string(i));
        const double t = static_cast<double>(i + 1) * params.macro_dt;
        slow.times.push_back(t);
        fast.times.push_back(t);
        slow.states.push_back(x);
        fast.states.push_back(y);
    }
    return {std::move(slow), std::move(fast)};
}

Trajectory simulate_averaged(const SineField& x0, const ModelSpec& model, const SimParams& params,
                             const FbarMode& mode, std::uint32_t path_id) {
    AveragedStepper st(model, params, mode, path_id);
    SineField x = x0.resized(params.m);
    const std::size_t n = params.n_steps();
    Trajectory tr;
    tr.kind = TrajectoryKind::averaged;
    tr.times.push_back(0.0);
    tr.states.push_back(x);
    for (std::size_t i = 0; i < n; ++i) {
        st.step(x.coeffs(), i);
        if (!x.all_finite())
            throw std::domain_error("simulate_averaged: state blew up at step " + std::to_string(i));
        tr.times.push_back(static_cast<double>(i + 1) * params.macro_dt);
        tr.states.push_back(x);
    }
    return tr;
}

}  // namespace msbl
