#include "coopstab/model.hpp"

#include <cmath>
#include <set>

namespace coopstab {

double hill_response(double m, double z) {
    if (z == 0.0) return 0.0;
    const double p = std::pow(std::abs(z), m);
    const double v = p / (1.0 + p);
    return z > 0 ? v : -v;
}

double hill_response_deriv(double m, double z) {
    const double az = std::abs(z);
    if (az == 0.0) return m == 1.0 ? 1.0 : 0.0;
    const double p = std::pow(az, m);
    const double denom = (1.0 + p) * (1.0 + p);
    return m * std::pow(az, m - 1.0) / denom;
}

double DiffusionSpec::value(double z) const {
    switch (kind) {
        case Kind::Const:
            return std::sqrt(c);
        case Kind::LinearGrowth:
            return std::sqrt(c * (z * z + 1.0));
    }
    return 0.0;
}

double DiffusionSpec::deriv(double z) const {
    switch (kind) {
        case Kind::Const:
            return 0.0;
        case Kind::LinearGrowth:
            return c * z / value(z);
    }
    return 0.0;
}

void GriffithParams::validate() const {
    if (alphas.empty()) throw std::invalid_argument("griffith: needs at least one decay rate");
    for (double a : alphas)
        if (!(a > 0.0)) throw std::invalid_argument("griffith: decay rates must be positive");
    if (!(m >= 1.0)) throw std::invalid_argument("griffith: Hill exponent must be >= 1");
    if (!(sigma.c > 0.0)) throw std::invalid_argument("griffith: diffusion constant must be positive");
}

Vec griffith_drift(const GriffithParams& p, const Vec& x) {
    const int r = p.dim();
    if (x.size() != r) throw std::invalid_argument("griffith_drift: dimension mismatch");
    Vec b(r);
    b[0] = hill_response(p.m, x[r - 1]) - p.alphas[0] * x[0];
    for (int j = 1; j < r; ++j) b[j] = x[j - 1] - p.alphas[j] * x[j];
    return b;
}

Mat griffith_jacobian(const GriffithParams& p, const Vec& x) {
    const int r = p.dim();
    if (x.size() != r) throw std::invalid_argument("griffith_jacobian: dimension mismatch");
    Mat j = Mat::Zero(r, r);
    for (int i = 0; i < r; ++i) j(i, i) = -p.alphas[i];
    for (int i = 1; i < r; ++i) j(i, i - 1) = 1.0;
    j(0, r - 1) += hill_response_deriv(p.m, x[r - 1]);
    return j;
}

Vec griffith_ray(const GriffithParams& p) {
    const int r = p.dim();
    Vec v(r);
    v[r - 1] = 1.0;
    for (int i = r - 2; i >= 0; --i) v[i] = v[i + 1] * p.alphas[i + 1];
    return v;
}

Mat Model::noise_covariance(const Vec& x) const {
    const Mat s = sigma(x);
    return s * s.transpose();
}

Model griffith_model(GriffithParams p) {
    p.validate();
    const int r = p.dim();
    Model m;
    m.dim = r;
    m.name = "griffith";
    m.griffith = p;
    m.drift = [p](const Vec& x) { return griffith_drift(p, x); };
    m.jacobian = [p](const Vec& x) { return griffith_jacobian(p, x); };
    m.sigma = [p, r](const Vec& x) {
        Mat s = Mat::Zero(r, r);
        for (int j = 0; j < r; ++j) s(j, j) = p.sigma.value(x[j]);
        return s;
    };
    m.sigma_constant = p.sigma.constant();
    if (!m.sigma_constant) {
        m.sigma_partial = [p, r](const Vec& x, int k) {
            Mat d = Mat::Zero(r, r);
            d(k, k) = p.sigma.deriv(x[k]);
            return d;
        };
    }
    return m;
}

Model ou_model(double lambda, int dim) {
    if (dim < 1) throw std::invalid_argument("ou_model: dim must be >= 1");
    Model m;
    m.dim = dim;
    m.name = "ou";
    m.drift = [lambda](const Vec& x) { return Vec(-lambda * x); };
    m.jacobian = [lambda, dim](const Vec&) { return Mat(-lambda * Mat::Identity(dim, dim)); };
    m.sigma = [dim](const Vec&) { return Mat(Mat::Identity(dim, dim)); };
    m.sigma_constant = true;
    return m;
}

namespace {

void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument(where + ": unknown key '" + it.key() + "'");
}

DiffusionSpec diffusion_from_json(const nlohmann::json& j) {
    reject_unknown_keys(j, {"type", "c"}, "model.sigma");
    DiffusionSpec s;
    const std::string type = j.at("type").get<std::string>();
    if (type == "const")
        s.kind = DiffusionSpec::Kind::Const;
    else if (type == "linear")
        s.kind = DiffusionSpec::Kind::LinearGrowth;
    else
        throw std::invalid_argument("model.sigma: unknown type '" + type + "'");
    s.c = j.value("c", 1.0);
    if (!(s.c > 0.0)) throw std::invalid_argument("model.sigma: c must be positive");
    return s;
}

}  // namespace

Model model_from_json(const nlohmann::json& spec) {
    if (!spec.is_object()) throw std::invalid_argument("model: expected an object");
    const std::string type = spec.at("type").get<std::string>();
    if (type == "griffith") {
        reject_unknown_keys(spec, {"type", "alphas", "m", "sigma"}, "model");
        GriffithParams p;
        p.alphas = spec.at("alphas").get<std::vector<double>>();
        p.m = spec.at("m").get<double>();
        if (spec.contains("sigma")) p.sigma = diffusion_from_json(spec.at("sigma"));
        return griffith_model(p);
    }
    if (type == "ou") {
        reject_unknown_keys(spec, {"type", "lambda", "dim"}, "model");
        return ou_model(spec.at("lambda").get<double>(), spec.value("dim", 1));
    }
    throw std::invalid_argument("model: unknown type '" + type + "'");
}

double hopf_threshold() {
    const double c = std::cos(2.0 * M_PI / 5.0);
    return 1.0 / std::pow(c, 5.0);
}

HopfPoint hopf_constants(double m, int r) {
    if (r != 5) throw std::invalid_argument("hopf_constants: closed form is specific to r = 5");
    const double c5 = std::pow(std::cos(2.0 * M_PI / 5.0), 5.0);
    const double inner = m * c5 - 1.0;
    // exact-threshold arguments land a rounding error below zero
    if (inner < -1e-12 * std::max(1.0, m * c5)) throw std::domain_error("no Hopf point");
    HopfPoint h;
    h.eta = std::pow(std::max(inner, 0.0), 1.0 / m);
    if (h.eta == 0.0) {
        h.beta = 0.0;
        return h;
    }
    h.beta = std::pow(std::pow(h.eta, m - 1.0) / (1.0 + std::pow(h.eta, m)), 0.2);
    return h;
}

}  // namespace coopstab
