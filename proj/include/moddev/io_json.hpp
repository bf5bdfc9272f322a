#ifndef MODDEV_IO_JSON_HPP
#define MODDEV_IO_JSON_HPP

#include <json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "moddev/convex.hpp"
#include "moddev/gaussian.hpp"
#include "moddev/tilting.hpp"

namespace moddev {

/// Covariance from either an explicit matrix or a spectral rule
/// {"spectral": {"rule": "j^-p", "p": ..., "dim": ...}}.
Matrix parse_covariance(const nlohmann::json& j);

/// {"covariance": [[...], ...]} or {"spectral": {...}}; also accepts a
/// bare matrix.
GaussianModel parse_model(const nlohmann::json& j);

SpectralModel parse_spectral(const nlohmann::json& j);

/// {"type":"ball","center":[...],"radius":r} |
/// {"type":"halfspace","normal":[...],"offset":c} |
/// {"type":"polytope","constraints":[...]}
ConvexBody parse_body(const nlohmann::json& j);

/// {"type":"gaussian","covariance":...} |
/// {"type":"discrete","atoms":[[...],...],"probs":[...]} |
/// {"type":"rademacher","scales":[...]}
BaseDistribution parse_distribution(const nlohmann::json& j);

/// {"c": ..., "alpha": ...}
GrowthSchedule parse_schedule(const nlohmann::json& j);

/// {"kind":"sqrt"|"sqrt_log","beta":...,"delta":...}
SliceSpec parse_slice_spec(const nlohmann::json& j);

/// Formats a double with 17 significant digits ("inf"/"-inf"/"nan" for
/// non-finite values) so emitted results are byte-auditable.
std::string format_double(double x);

/// Minimal streaming JSON writer. All numbers go through format_double,
/// keeping output byte-deterministic across runs and thread counts;
/// non-finite doubles are emitted as quoted strings.
class JsonWriter {
public:
    explicit JsonWriter(std::ostream& os) : os_(os) {}

    JsonWriter& begin_object();
    JsonWriter& end_object();
    JsonWriter& begin_array();
    JsonWriter& end_array();
    JsonWriter& key(const std::string& k);
    JsonWriter& value(double v);
    JsonWriter& value(long v);
    JsonWriter& value(unsigned long long v);
    JsonWriter& value(int v) { return value(static_cast<long>(v)); }
    JsonWriter& value(bool v);
    JsonWriter& value(const std::string& v);
    JsonWriter& value(const char* v) { return value(std::string(v)); }
    JsonWriter& value(const Vector& v);
    JsonWriter& value(const std::vector<double>& v);

    template <typename T>
    JsonWriter& kv(const std::string& k, const T& v) {
        key(k);
        return value(v);
    }

private:
    void separator();
    std::ostream& os_;
    std::vector<bool> first_stack_{};
    bool pending_key_ = false;
};

}  // namespace moddev

#endif
