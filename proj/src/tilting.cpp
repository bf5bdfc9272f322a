#include "moddev/tilting.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "moddev/errors.hpp"

namespace moddev {

void check_base(const BaseDistribution& base) {
    if (const auto* db = std::get_if<DiscreteBase>(&base)) {
        if (db->atoms.empty() || db->atoms.size() != db->probs.size())
            fail(Errc::InvalidConfig, "discrete base needs matching atoms and probs");
        const auto d = db->atoms.front().size();
        if (d == 0) fail(Errc::InvalidConfig, "discrete base atoms must be nonempty");
        double total = 0.0;
        double scale = 0.0;
        Vector mean = Vector::Zero(d);
        for (size_t i = 0; i < db->atoms.size(); ++i) {
            if (db->atoms[i].size() != d)
                fail(Errc::DimensionMismatch, "discrete atoms disagree on dimension");
            if (!(db->probs[i] > 0.0))
                fail(Errc::InvalidConfig, "discrete probabilities must be positive");
            total += db->probs[i];
            mean += db->probs[i] * db->atoms[i];
            scale = std::max(scale, db->atoms[i].cwiseAbs().maxCoeff());
        }
        if (std::abs(total - 1.0) > 1e-12)
            fail(Errc::InvalidConfig, "discrete probabilities must sum to 1");
        if (mean.cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, scale))
            fail(Errc::InvalidConfig, "discrete base must have mean zero");
    } else if (const auto* rp = std::get_if<RademacherProduct>(&base)) {
        if (rp->scales.size() == 0)
            fail(Errc::InvalidConfig, "rademacher base needs at least one coordinate");
        if (!(rp->scales.minCoeff() > 0.0))
            fail(Errc::InvalidConfig, "rademacher scales must be positive");
    }
    // GaussianBase is validated by its GaussianModel.
}

int base_dim(const BaseDistribution& base) {
    return std::visit(
        [](const auto& b) -> int {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, GaussianBase>)
                return b.model.dim;
            else if constexpr (std::is_same_v<T, DiscreteBase>)
                return static_cast<int>(b.atoms.front().size());
            else
                return static_cast<int>(b.scales.size());
        },
        base);
}

double log_mgf(const BaseDistribution& base, const Vector& theta) {
    if (theta.size() != base_dim(base))
        fail(Errc::DimensionMismatch, "theta dimension vs base dimension");
    return std::visit(
        [&](const auto& b) -> double {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, GaussianBase>) {
                return 0.5 * theta.dot(b.model.covariance * theta);
            } else if constexpr (std::is_same_v<T, DiscreteBase>) {
                // log-sum-exp over the atoms
                double peak = -std::numeric_limits<double>::infinity();
                for (const auto& x : b.atoms) peak = std::max(peak, theta.dot(x));
                double acc = 0.0;
                for (size_t i = 0; i < b.atoms.size(); ++i)
                    acc += b.probs[i] * std::exp(theta.dot(b.atoms[i]) - peak);
                return peak + std::log(acc);
            } else {
                double acc = 0.0;
                for (int j = 0; j < b.scales.size(); ++j) {
                    const double t = std::abs(theta[j] * b.scales[j]);
                    acc += t + std::log1p(std::exp(-2.0 * t)) - std::log(2.0);
                }
                return acc;
            }
        },
        base);
}

double mgf(const BaseDistribution& base, const Vector& theta) {
    return std::exp(log_mgf(base, theta));
}

Matrix covariance(const BaseDistribution& base) {
    return std::visit(
        [](const auto& b) -> Matrix {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, GaussianBase>) {
                return b.model.covariance;
            } else if constexpr (std::is_same_v<T, DiscreteBase>) {
                const auto d = b.atoms.front().size();
                Matrix cov = Matrix::Zero(d, d);
                for (size_t i = 0; i < b.atoms.size(); ++i)
                    cov += b.probs[i] * b.atoms[i] * b.atoms[i].transpose();
                return cov;
            } else {
                return Vector(b.scales.array().square()).asDiagonal();
            }
        },
        base);
}

GrowthSchedule GrowthSchedule::make(double c, double alpha) {
    if (!(c > 0.0)) fail(Errc::InvalidConfig, "schedule coefficient c must be positive");
    if (!(alpha > 0.5))
        fail(Errc::InvalidConfig, "schedule exponent alpha must exceed 1/2");
    if (!(alpha < 1.0))
        fail(Errc::InvalidConfig, "schedule exponent alpha must be below 1");
    return GrowthSchedule{c, alpha};
}

double GrowthSchedule::b(double n) const { return c * std::pow(n, alpha); }

double GrowthSchedule::rho(double n) const { return b(n) / std::sqrt(n); }

TiltedSampler::TiltedSampler(BaseDistribution base, Vector theta)
    : base_(std::move(base)), theta_(std::move(theta)) {
    check_base(base_);
    if (theta_.size() != base_dim(base_))
        fail(Errc::DimensionMismatch, "theta dimension vs base dimension");
    log_normalizer_ = log_mgf(base_, theta_);

    if (const auto* gb = std::get_if<GaussianBase>(&base_)) {
        gaussian_shift_ = gb->model.covariance * theta_;
    } else if (const auto* db = std::get_if<DiscreteBase>(&base_)) {
        const size_t k = db->atoms.size();
        tilted_probs_.resize(k);
        double total = 0.0;
        for (size_t i = 0; i < k; ++i) {
            tilted_probs_[i] =
                db->probs[i] * std::exp(theta_.dot(db->atoms[i]) - log_normalizer_);
            total += tilted_probs_[i];
        }
        // renormalize away the last few ulps so the CDF ends exactly at 1
        tilted_cdf_.resize(k);
        double run = 0.0;
        for (size_t i = 0; i < k; ++i) {
            tilted_probs_[i] /= total;
            run += tilted_probs_[i];
            tilted_cdf_[i] = run;
        }
        tilted_cdf_.back() = 1.0;
    } else {
        const auto& rp = std::get<RademacherProduct>(base_);
        p_plus_.resize(rp.scales.size());
        for (int j = 0; j < rp.scales.size(); ++j) {
            const double t = theta_[j] * rp.scales[j];
            // e^t / (2 cosh t) = logistic(2t)
            p_plus_[j] = 1.0 / (1.0 + std::exp(-2.0 * t));
        }
    }
}

const std::vector<double>& TiltedSampler::tilted_probs() const {
    if (!std::holds_alternative<DiscreteBase>(base_))
        fail(Errc::InvalidConfig, "tilted_probs only exists for discrete bases");
    return tilted_probs_;
}

Vector TiltedSampler::sample_increment(Rng& rng) const {
    if (const auto* gb = std::get_if<GaussianBase>(&base_)) {
        return gaussian_shift_ + sample(gb->model, rng);
    }
    if (const auto* db = std::get_if<DiscreteBase>(&base_)) {
        const double u = rng.uniform();
        const auto it = std::lower_bound(tilted_cdf_.begin(), tilted_cdf_.end(), u);
        const size_t idx = std::min<size_t>(it - tilted_cdf_.begin(),
                                            tilted_cdf_.size() - 1);
        return db->atoms[idx];
    }
    const auto& rp = std::get<RademacherProduct>(base_);
    Vector out(rp.scales.size());
    for (int j = 0; j < rp.scales.size(); ++j)
        out[j] = rng.uniform() < p_plus_[j] ? rp.scales[j] : -rp.scales[j];
    return out;
}

Vector TiltedSampler::sample_sum(long n, Rng& rng) const {
    if (n < 1) fail(Errc::InvalidConfig, "sample_sum needs n >= 1");
    if (const auto* gb = std::get_if<GaussianBase>(&base_)) {
        // S_n ~ N(n Sigma theta, n Sigma) exactly
        Vector z(gb->model.dim);
        for (int i = 0; i < gb->model.dim; ++i) z[i] = rng.normal();
        return static_cast<double>(n) * gaussian_shift_ +
               std::sqrt(static_cast<double>(n)) * (gb->model.lower_factor * z);
    }
    // Allocation-free accumulation; these loops sit inside the hot path of
    // the estimators at n up to 2^14 per replication.
    Vector acc = Vector::Zero(base_dim(base_));
    if (const auto* db = std::get_if<DiscreteBase>(&base_)) {
        for (long i = 0; i < n; ++i) {
            const double u = rng.uniform();
            const auto it =
                std::lower_bound(tilted_cdf_.begin(), tilted_cdf_.end(), u);
            const size_t idx =
                std::min<size_t>(it - tilted_cdf_.begin(), tilted_cdf_.size() - 1);
            acc += db->atoms[idx];
        }
        return acc;
    }
    const auto& rp = std::get<RademacherProduct>(base_);
    const int d = static_cast<int>(rp.scales.size());
    for (int j = 0; j < d; ++j) {
        if (p_plus_[j] == 0.5) {
            // untilted coordinate: 64 fair signs per engine word
            long plus = 0;
            long left = n;
            while (left >= 64) {
                plus += std::popcount(rng.next_u64());
                left -= 64;
            }
            if (left > 0)
                plus += std::popcount(rng.next_u64() >> (64 - left));
            acc[j] = rp.scales[j] * static_cast<double>(2 * plus - n);
        } else {
            double coord = 0.0;
            for (long i = 0; i < n; ++i)
                coord += rng.uniform() < p_plus_[j] ? rp.scales[j] : -rp.scales[j];
            acc[j] = coord;
        }
    }
    return acc;
}

Vector TiltedSampler::mean() const {
    if (std::holds_alternative<GaussianBase>(base_)) return gaussian_shift_;
    if (const auto* db = std::get_if<DiscreteBase>(&base_)) {
        Vector out = Vector::Zero(base_dim(base_));
        for (size_t i = 0; i < db->atoms.size(); ++i)
            out += tilted_probs_[i] * db->atoms[i];
        return out;
    }
    const auto& rp = std::get<RademacherProduct>(base_);
    Vector out(rp.scales.size());
    for (int j = 0; j < rp.scales.size(); ++j)
        out[j] = rp.scales[j] * std::tanh(theta_[j] * rp.scales[j]);
    return out;
}

double TiltedSampler::variance_g(const Vector& v) const {
    if (v.size() != base_dim(base_))
        fail(Errc::DimensionMismatch, "v dimension vs base dimension");
    if (const auto* gb = std::get_if<GaussianBase>(&base_)) {
        return v.dot(gb->model.covariance * v);  // tilt preserves covariance
    }
    if (const auto* db = std::get_if<DiscreteBase>(&base_)) {
        double m1 = 0.0, m2 = 0.0;
        for (size_t i = 0; i < db->atoms.size(); ++i) {
            const double gi = v.dot(db->atoms[i]);
            m1 += tilted_probs_[i] * gi;
            m2 += tilted_probs_[i] * gi * gi;
        }
        return m2 - m1 * m1;
    }
    const auto& rp = std::get<RademacherProduct>(base_);
    double acc = 0.0;
    for (int j = 0; j < rp.scales.size(); ++j) {
        const double t = std::tanh(theta_[j] * rp.scales[j]);
        acc += v[j] * v[j] * rp.scales[j] * rp.scales[j] * (1.0 - t * t);
    }
    return acc;
}

TiltedSampler make_tilt(const BaseDistribution& base, const DominatingPoint& dp,
                        long n, const GrowthSchedule& schedule) {
    if (n < 1) fail(Errc::InvalidConfig, "make_tilt needs n >= 1");
    const double scale = schedule.b(static_cast<double>(n)) / static_cast<double>(n);
    return TiltedSampler(base, scale * dp.v);
}

TiltedSampler make_tilt_direct(const BaseDistribution& base, const Vector& theta) {
    return TiltedSampler(base, theta);
}

Vector tilted_mean(const TiltedSampler& sampler) { return sampler.mean(); }

double tilted_variance_g(const TiltedSampler& sampler, const DominatingPoint& dp) {
    return sampler.variance_g(dp.v);
}

double scaled_log_mgf_at(const BaseDistribution& base, const Vector& f_vec,
                         double n, double b_n) {
    if (!(n > 0.0) || !(b_n > 0.0))
        fail(Errc::InvalidConfig, "scaled_log_mgf needs n > 0 and b_n > 0");
    const double ratio = b_n / n;
    return (n * n) / (b_n * b_n) * log_mgf(base, ratio * f_vec);
}

double scaled_log_mgf(const BaseDistribution& base, const Vector& f_vec, double n,
                      const GrowthSchedule& schedule) {
    return scaled_log_mgf_at(base, f_vec, n, schedule.b(n));
}

}  // namespace moddev
