#include "moddev/io_json.hpp"

#include <cmath>
#include <cstdio>

#include "moddev/errors.hpp"

namespace moddev {

using nlohmann::json;

namespace {

double get_number(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number())
        fail(Errc::InvalidConfig, std::string("missing or non-numeric field '") +
                                      key + "'");
    return j[key].get<double>();
}

Vector parse_vector(const json& j, const char* what) {
    if (!j.is_array() || j.empty())
        fail(Errc::InvalidConfig, std::string(what) + " must be a nonempty array");
    Vector v(j.size());
    for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number())
            fail(Errc::InvalidConfig, std::string(what) + " has a non-numeric entry");
        v[static_cast<int>(i)] = j[i].get<double>();
    }
    return v;
}

Matrix parse_matrix(const json& j, const char* what) {
    if (!j.is_array() || j.empty())
        fail(Errc::InvalidConfig, std::string(what) + " must be a nonempty 2d array");
    const size_t rows = j.size();
    Matrix m;
    for (size_t r = 0; r < rows; ++r) {
        const Vector row = parse_vector(j[r], what);
        if (r == 0) m.resize(rows, row.size());
        if (row.size() != m.cols())
            fail(Errc::InvalidConfig, std::string(what) + " rows differ in length");
        m.row(static_cast<int>(r)) = row;
    }
    return m;
}

}  // namespace

SpectralModel parse_spectral(const json& j) {
    if (!j.is_object()) fail(Errc::InvalidConfig, "spectral spec must be an object");
    const std::string rule = j.value("rule", "j^-p");
    if (rule != "j^-p")
        fail(Errc::InvalidConfig, "unsupported spectral rule '" + rule + "'");
    const double p = get_number(j, "p");
    const int dim = static_cast<int>(get_number(j, "dim"));
    return make_power_spectrum(p, dim);
}

Matrix parse_covariance(const json& j) {
    if (j.is_array()) return parse_matrix(j, "covariance");
    if (j.is_object() && j.contains("spectral")) {
        const SpectralModel spec = parse_spectral(j["spectral"]);
        Vector diag = Eigen::Map<const Vector>(spec.eigenvalues.data(),
                                               spec.eigenvalues.size());
        return Matrix(diag.asDiagonal());
    }
    fail(Errc::InvalidConfig, "covariance must be a matrix or a spectral spec");
}

GaussianModel parse_model(const json& j) {
    if (j.is_array()) return build_gaussian(parse_matrix(j, "covariance"));
    if (j.is_object()) {
        if (j.contains("covariance"))
            return build_gaussian(parse_covariance(j["covariance"]));
        if (j.contains("spectral")) return to_gaussian(parse_spectral(j["spectral"]));
    }
    fail(Errc::InvalidConfig, "model needs 'covariance' or 'spectral'");
}

ConvexBody parse_body(const json& j) {
    if (!j.is_object() || !j.contains("type"))
        fail(Errc::InvalidConfig, "body needs a 'type' field");
    const std::string type = j["type"].get<std::string>();
    ConvexBody body;
    if (type == "ball") {
        body = Ball{parse_vector(j.at("center"), "ball center"),
                    get_number(j, "radius")};
    } else if (type == "halfspace") {
        body = HalfSpace{parse_vector(j.at("normal"), "half-space normal"),
                         get_number(j, "offset")};
    } else if (type == "polytope") {
        if (!j.contains("constraints") || !j["constraints"].is_array())
            fail(Errc::InvalidConfig, "polytope needs a 'constraints' array");
        Polytope poly;
        for (const auto& cj : j["constraints"])
            poly.constraints.push_back(
                HalfSpace{parse_vector(cj.at("normal"), "constraint normal"),
                          get_number(cj, "offset")});
        body = poly;
    } else {
        fail(Errc::InvalidConfig, "unknown body type '" + type + "'");
    }
    check_structure(body);
    return body;
}

BaseDistribution parse_distribution(const json& j) {
    if (!j.is_object() || !j.contains("type"))
        fail(Errc::InvalidConfig, "distribution needs a 'type' field");
    const std::string type = j["type"].get<std::string>();
    BaseDistribution base;
    if (type == "gaussian") {
        base = GaussianBase{build_gaussian(parse_covariance(j.at("covariance")))};
    } else if (type == "discrete") {
        DiscreteBase db;
        if (!j.contains("atoms") || !j["atoms"].is_array())
            fail(Errc::InvalidConfig, "discrete distribution needs 'atoms'");
        for (const auto& aj : j["atoms"]) db.atoms.push_back(parse_vector(aj, "atom"));
        const Vector probs = parse_vector(j.at("probs"), "probs");
        db.probs.assign(probs.data(), probs.data() + probs.size());
        base = db;
    } else if (type == "rademacher") {
        base = RademacherProduct{parse_vector(j.at("scales"), "scales")};
    } else {
        fail(Errc::InvalidConfig, "unknown distribution type '" + type + "'");
    }
    check_base(base);
    return base;
}

GrowthSchedule parse_schedule(const json& j) {
    if (!j.is_object()) fail(Errc::InvalidConfig, "schedule must be an object");
    return GrowthSchedule::make(get_number(j, "c"), get_number(j, "alpha"));
}

SliceSpec parse_slice_spec(const json& j) {
    if (!j.is_object()) fail(Errc::InvalidConfig, "slice spec must be an object");
    SliceSpec spec;
    const std::string kind = j.value("kind", "sqrt");
    if (kind == "sqrt")
        spec.kind = SliceSpec::Kind::Sqrt;
    else if (kind == "sqrt_log")
        spec.kind = SliceSpec::Kind::SqrtLog;
    else
        fail(Errc::InvalidConfig, "slice kind must be 'sqrt' or 'sqrt_log'");
    spec.beta = get_number(j, "beta");
    spec.delta = get_number(j, "delta");
    if (!(spec.beta > 0.0) || !(spec.delta > 0.0))
        fail(Errc::InvalidConfig, "slice spec needs beta > 0 and delta > 0");
    return spec;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void JsonWriter::separator() {
    if (!first_stack_.empty() && !pending_key_) {
        if (!first_stack_.back()) os_ << ",";
        first_stack_.back() = false;
    }
    pending_key_ = false;
}

JsonWriter& JsonWriter::begin_object() {
    separator();
    os_ << "{";
    first_stack_.push_back(true);
    return *this;
}

JsonWriter& JsonWriter::end_object() {
    os_ << "}";
    first_stack_.pop_back();
    return *this;
}

JsonWriter& JsonWriter::begin_array() {
    separator();
    os_ << "[";
    first_stack_.push_back(true);
    return *this;
}

JsonWriter& JsonWriter::end_array() {
    os_ << "]";
    first_stack_.pop_back();
    return *this;
}

JsonWriter& JsonWriter::key(const std::string& k) {
    separator();
    os_ << '"' << k << "\":";
    pending_key_ = true;
    return *this;
}

JsonWriter& JsonWriter::value(double v) {
    separator();
    if (std::isfinite(v))
        os_ << format_double(v);
    else
        os_ << '"' << format_double(v) << '"';
    return *this;
}

JsonWriter& JsonWriter::value(long v) {
    separator();
    os_ << v;
    return *this;
}

JsonWriter& JsonWriter::value(unsigned long long v) {
    separator();
    os_ << v;
    return *this;
}

JsonWriter& JsonWriter::value(bool v) {
    separator();
    os_ << (v ? "true" : "false");
    return *this;
}

JsonWriter& JsonWriter::value(const std::string& v) {
    separator();
    os_ << '"';
    for (char c : v) {
        switch (c) {
            case '"': os_ << "\\\""; break;
            case '\\': os_ << "\\\\"; break;
            case '\n': os_ << "\\n"; break;
            case '\t': os_ << "\\t"; break;
            default: os_ << c;
        }
    }
    os_ << '"';
    return *this;
}

JsonWriter& JsonWriter::value(const Vector& v) {
    begin_array();
    for (int i = 0; i < v.size(); ++i) value(v[i]);
    return end_array();
}

JsonWriter& JsonWriter::value(const std::vector<double>& v) {
    begin_array();
    for (double x : v) value(x);
    return end_array();
}

}  // namespace moddev
