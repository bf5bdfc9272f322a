#include "moddev/representation.hpp"

#include <cmath>

#include "moddev/asymptotics.hpp"
#include "moddev/errors.hpp"
#include "moddev/parallel.hpp"

namespace moddev {

namespace {

constexpr double kEnumerationCap = 1e7;

struct AtomSet {
    std::vector<Vector> atoms;
    std::vector<double> probs;
};

// Finite-support view of a base. Rademacher coordinates expand to the
// 2^d sign combinations in binary-counting order.
AtomSet atoms_of(const BaseDistribution& base) {
    if (const auto* db = std::get_if<DiscreteBase>(&base))
        return {db->atoms, db->probs};
    if (const auto* rp = std::get_if<RademacherProduct>(&base)) {
        const int d = static_cast<int>(rp->scales.size());
        if (d > 20) fail(Errc::TooLarge, "rademacher enumeration dimension too large");
        const size_t combos = size_t{1} << d;
        AtomSet out;
        out.atoms.reserve(combos);
        out.probs.assign(combos, 1.0 / static_cast<double>(combos));
        for (size_t mask = 0; mask < combos; ++mask) {
            Vector x(d);
            for (int j = 0; j < d; ++j)
                x[j] = (mask >> j) & 1 ? rp->scales[j] : -rp->scales[j];
            out.atoms.push_back(std::move(x));
        }
        return out;
    }
    fail(Errc::InvalidConfig, "enumeration requires a finite-support base");
}

void check_enumeration_size(size_t num_atoms, long n) {
    if (n < 1) fail(Errc::InvalidConfig, "n must be >= 1");
    double total = 1.0;
    for (long i = 0; i < n; ++i) {
        total *= static_cast<double>(num_atoms);
        if (total > kEnumerationCap)
            fail(Errc::TooLarge, "(#atoms)^n exceeds the enumeration cap 1e7");
    }
}

struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

// Depth-first walk over all outcome tuples, maintaining the running sum
// and per-atom-probability product; `leaf(s_n, prob)` fires once per tuple.
template <typename Leaf>
void enumerate_tuples(const AtomSet& atoms, const std::vector<double>& probs,
                      long n, const Leaf& leaf) {
    const int d = static_cast<int>(atoms.atoms.front().size());
    const size_t k = atoms.atoms.size();
    std::vector<size_t> choice(n, 0);
    std::vector<Vector> partial(n + 1, Vector::Zero(d));
    std::vector<double> pprod(n + 1, 1.0);
    long depth = 0;
    for (;;) {
        if (depth == n) {
            leaf(partial[n], pprod[n]);
            // backtrack to the deepest incrementable slot
            --depth;
            while (depth >= 0 && choice[depth] == k - 1) --depth;
            if (depth < 0) return;
            ++choice[depth];
        }
        partial[depth + 1] = partial[depth] + atoms.atoms[choice[depth]];
        pprod[depth + 1] = pprod[depth] * probs[choice[depth]];
        ++depth;
        if (depth < n) choice[depth] = 0;
    }
}

}  // namespace

double brute_force_probability(const BaseDistribution& base, long n, double b_n,
                               const ConvexBody& body) {
    check_base(base);
    check_structure(body);
    if (!(b_n > 0.0)) fail(Errc::InvalidConfig, "b_n must be positive");
    const AtomSet atoms = atoms_of(base);
    check_enumeration_size(atoms.atoms.size(), n);
    const ConvexBody event_set = scale(body, b_n);

    KahanSum acc;
    enumerate_tuples(atoms, atoms.probs, n, [&](const Vector& s, double prob) {
        if (contains(event_set, s)) acc.add(prob);
    });
    return acc.sum;
}

double repr_prefactor_full(const BaseDistribution& base, const DominatingPoint& dp,
                           double n, double b_n) {
    const double r = b_n * b_n / n;
    const double correction =
        0.5 * dp.sigma_g2 - scaled_log_mgf_at(base, dp.v, n, b_n);
    return std::exp(-r * dp.lambda_star - r * correction);
}

double theorem1_prefactor(const DominatingPoint& dp, double n, double b_n) {
    if (!(n >= 1.0) || !(b_n > 0.0))
        fail(Errc::InvalidConfig, "need n >= 1 and b_n > 0");
    if (!(dp.lambda_star > 0.0))
        fail(Errc::InvalidSet, "rate at the dominating point must be positive");
    return std::exp(-(b_n * b_n / n) * dp.lambda_star);
}

ReprDecomposition repr_exact(const BaseDistribution& base, long n, double b_n,
                             const ConvexBody& body, const DominatingPoint& dp) {
    check_base(base);
    check_structure(body);
    if (!(b_n > 0.0)) fail(Errc::InvalidConfig, "b_n must be positive");
    {
        const Matrix cov = covariance(base);
        const double scale_hint = std::max(1.0, cov.cwiseAbs().maxCoeff());
        if (dp.covariance.rows() != cov.rows() ||
            (dp.covariance - cov).cwiseAbs().maxCoeff() > 1e-9 * scale_hint)
            fail(Errc::CovarianceMismatch,
                 "dominating point solved against a different covariance");
    }
    const AtomSet atoms = atoms_of(base);
    check_enumeration_size(atoms.atoms.size(), n);

    const double nn = static_cast<double>(n);
    const Vector theta = (b_n / nn) * dp.v;
    const TiltedSampler sampler = make_tilt_direct(base, theta);

    // Tilted probability of atom i within the expanded atom set.
    std::vector<double> q(atoms.atoms.size());
    {
        const double log_m = log_mgf(base, theta);
        double total = 0.0;
        for (size_t i = 0; i < atoms.atoms.size(); ++i) {
            q[i] = atoms.probs[i] * std::exp(theta.dot(atoms.atoms[i]) - log_m);
            total += q[i];
        }
        for (auto& qi : q) qi /= total;
    }

    const double r = b_n * b_n / nn;
    const double ga0 = dp.g(dp.a0);
    const ConvexBody event_set = scale(body, b_n);

    KahanSum jn;
    enumerate_tuples(atoms, q, n, [&](const Vector& s, double qprob) {
        if (!contains(event_set, s)) return;
        const double g_shift = dp.g(s) / b_n - ga0;  // g(S_n/b_n - a0)
        jn.add(qprob * std::exp(-r * g_shift));
    });

    ReprDecomposition out;
    out.mode = ReprMode::ExactEnumeration;
    out.prob = brute_force_probability(base, n, b_n, body);
    out.prefactor = repr_prefactor_full(base, dp, nn, b_n);
    out.j_n = jn.sum;
    out.gap = std::abs(out.prob - out.prefactor * out.j_n);
    return out;
}

ReprDecomposition repr_estimate(const BaseDistribution& base, long n, double b_n,
                                const ConvexBody& body, const DominatingPoint& dp,
                                long samples, std::uint64_t seed, int threads) {
    check_base(base);
    check_structure(body);
    if (n < 1 || samples < 2) fail(Errc::InvalidConfig, "need n >= 1, samples >= 2");
    if (!(b_n > 0.0)) fail(Errc::InvalidConfig, "b_n must be positive");

    const double nn = static_cast<double>(n);
    const Vector theta = (b_n / nn) * dp.v;
    const TiltedSampler sampler = make_tilt_direct(base, theta);
    const double n_log_m = nn * sampler.log_normalizer();
    const ConvexBody event_set = scale(body, b_n);
    const double r = b_n * b_n / nn;
    const double ga0 = dp.g(dp.a0);

    ReprDecomposition out;
    out.mode = ReprMode::MonteCarlo;
    out.prefactor = repr_prefactor_full(base, dp, nn, b_n);

    // probability side: tilted importance sampling
    McAccum prob_acc = run_replications(
        samples, mix64(seed, 0x70), threads, [&](Rng& rng, long) -> RepOutcome {
            const Vector s = sampler.sample_sum(n, rng);
            const double w = std::exp(n_log_m - theta.dot(s));
            const bool hit = contains(event_set, s);
            return {hit ? w : 0.0, w, hit};
        });
    out.prob = prob_acc.sum_y / static_cast<double>(samples);
    {
        const double var = std::max(
            0.0, (prob_acc.sum_y2 - samples * out.prob * out.prob) /
                     static_cast<double>(samples - 1));
        out.prob_se = std::sqrt(var / static_cast<double>(samples));
    }

    // j_n side on an independent stream, centered at (b_n^2/n) a0 so the
    // identity prob = prefactor * j_n holds for every n
    McAccum jn_acc = run_replications(
        samples, mix64(seed, 0x71), threads, [&](Rng& rng, long) -> RepOutcome {
            const Vector s = sampler.sample_sum(n, rng);
            if (!contains(event_set, s)) return {0.0, 1.0, false};
            return {std::exp(-r * (dp.g(s) / b_n - ga0)), 1.0, true};
        });
    out.j_n = jn_acc.sum_y / static_cast<double>(samples);
    {
        const double var = std::max(
            0.0, (jn_acc.sum_y2 - samples * out.j_n * out.j_n) /
                     static_cast<double>(samples - 1));
        out.j_n_se = std::sqrt(var / static_cast<double>(samples));
    }
    out.gap = std::abs(out.prob - out.prefactor * out.j_n);
    return out;
}

MeanSe jn_estimate(const TiltedSampler& sampler, const DominatingPoint& dp, long n,
                   double b_n, const ConvexBody& body, long samples,
                   std::uint64_t seed, int threads) {
    check_structure(body);
    if (n < 1 || samples < 2) fail(Errc::InvalidConfig, "need n >= 1, samples >= 2");
    if (!(b_n > 0.0)) fail(Errc::InvalidConfig, "b_n must be positive");

    const double nn = static_cast<double>(n);
    // T_n in (b_n^2/n) D is equivalent to S_n in b_n D.
    const ConvexBody event_set = scale(body, b_n);
    const double g_mean_tn = b_n * dp.g(sampler.mean());  // g(E T_n), exact

    McAccum acc = run_replications(
        samples, seed, threads, [&](Rng& rng, long) -> RepOutcome {
            const Vector s = sampler.sample_sum(n, rng);
            if (!contains(event_set, s)) return {0.0, 1.0, false};
            const double g_tn = (b_n / nn) * dp.g(s);
            return {std::exp(-(g_tn - g_mean_tn)), 1.0, true};
        });

    MeanSe out;
    out.samples = samples;
    out.mean = acc.sum_y / static_cast<double>(samples);
    const double var =
        std::max(0.0, (acc.sum_y2 - samples * out.mean * out.mean) /
                          static_cast<double>(samples - 1));
    out.se = std::sqrt(var / static_cast<double>(samples));
    return out;
}

ReprDecomposition repr_gaussian_halfspace(const GaussianModel& model,
                                          const HalfSpace& hs,
                                          const DominatingPoint& dp, double n,
                                          double b_n) {
    if (!(n >= 1.0) || !(b_n > 0.0))
        fail(Errc::InvalidConfig, "need n >= 1 and b_n > 0");
    const double sigma_g = std::sqrt(dp.sigma_g2);
    const double z = b_n * sigma_g / std::sqrt(n);
    const double r = b_n * b_n / n;

    ReprDecomposition out;
    out.mode = ReprMode::ExactEnumeration;
    // Under the tilt, W = g(S_n/b_n - a0) ~ N(0, (n/b_n^2) sigma_g^2) and
    // the event is exactly {W > 0}; the lognormal tail integral is
    // e^{kappa^2 tau^2 / 2} * Phi-bar(kappa tau) with kappa tau = z.
    out.j_n = std::exp(0.5 * r * dp.sigma_g2) * normal_upper_tail(z);
    out.prefactor = repr_prefactor_full(BaseDistribution(GaussianBase{model}), dp,
                                        n, b_n);
    // Probability side from the half-space data directly.
    const double sigma_w = std::sqrt(hs.normal.dot(model.covariance * hs.normal));
    out.prob = normal_upper_tail(b_n * hs.offset / (std::sqrt(n) * sigma_w));
    out.gap = std::abs(out.prob - out.prefactor * out.j_n);
    return out;
}

}  // namespace moddev
