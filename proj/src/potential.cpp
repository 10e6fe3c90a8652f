#include "scatlab/potential.hpp"

#include <algorithm>
#include <cmath>

#include "scatlab/sphere.hpp"
#include "scatlab/special.hpp"

namespace scatlab {

double inner_ramp(double t) {
  if (t <= 0.2) return 0;
  if (t >= 0.5) return 1;
  double s = (t - 0.2) / 0.3;
  return s * s * s * (10 + s * (-15 + 6 * s));
}

double real_harmonic(int dim, int l, int m, const Pt& xhat) {
  if (dim == 2) {
    double th = std::atan2(xhat[1], xhat[0]);
    if (m == 0) return 1.0 / std::sqrt(2 * PI);
    if (m > 0) return std::cos(m * th) / std::sqrt(PI);
    return std::sin(-m * th) / std::sqrt(PI);
  }
  if (m == 0) return sf::sph_harmonic(l, 0, xhat).real();
  double s = std::sqrt(2.0);
  if (m > 0) return s * sf::sph_harmonic(l, m, xhat).real();
  return s * sf::sph_harmonic(l, -m, xhat).imag();
}

namespace {

double eval_term(const ElectricTerm& t, double R, int dim, const Pt& x) {
  Pt d = x - t.center;
  double r = norm(d);
  if (t.family == "gaussian") {
    return t.amplitude * std::exp(-r * r / (2 * t.sigma * t.sigma));
  }
  if (t.family == "well") {
    return r < t.radius ? t.amplitude : 0.0;
  }
  if (t.family == "bump") {
    if (r >= t.radius) return 0.0;
    double u = r / t.radius;
    return t.amplitude * std::exp(1.0 - 1.0 / (1.0 - u * u));
  }
  if (t.family == "homogeneous") {
    double eta = inner_ramp(r / R);
    if (eta == 0) return 0.0;
    Pt xhat = (1.0 / r) * d;
    return t.amplitude * eta * std::pow(r, -t.order) * real_harmonic(dim, t.l, t.m, xhat);
  }
  if (t.family == "table") {
    if (t.table_r.empty() || r >= t.table_r.back()) return 0.0;
    auto it = std::upper_bound(t.table_r.begin(), t.table_r.end(), r);
    size_t i = it - t.table_r.begin();
    if (i == 0) return t.amplitude * t.table_v.front();
    double w = (r - t.table_r[i - 1]) / (t.table_r[i] - t.table_r[i - 1]);
    return t.amplitude * ((1 - w) * t.table_v[i - 1] + w * t.table_v[i]);
  }
  throw SchemaError("unknown electric family: " + t.family);
}

Pt read_pt(const nlohmann::json& j, const std::string& key, int dim) {
  Pt p{};
  if (!j.contains(key)) return p;
  auto a = j.at(key);
  if (!a.is_array() || int(a.size()) != dim)
    throw SchemaError("'" + key + "' must be an array of length " + std::to_string(dim));
  for (int d = 0; d < dim; ++d) p[d] = a[d].get<double>();
  return p;
}

double read_num(const nlohmann::json& j, const std::string& key, double fallback,
                bool required = false) {
  if (!j.contains(key)) {
    if (required) throw SchemaError("missing required key '" + key + "'");
    return fallback;
  }
  if (!j.at(key).is_number()) throw SchemaError("'" + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace

PotentialSpec PotentialSpec::from_json(const nlohmann::json& j) {
  PotentialSpec spec;
  if (!j.is_object()) throw SchemaError("potential spec must be an object");
  spec.dim = int(read_num(j, "dimension", 0, true));
  if (spec.dim != 2 && spec.dim != 3) throw SchemaError("'dimension' must be 2 or 3");
  if (j.contains("decay")) {
    const auto& d = j.at("decay");
    spec.rho = read_num(d, "rho", 0, true);
    spec.C = read_num(d, "C", 1);
    spec.R = read_num(d, "R", 1);
    if (!(spec.rho > 1)) throw SchemaError("'decay.rho' must exceed 1");
    if (!(spec.C > 0) || !(spec.R > 0)) throw SchemaError("'decay.C' and 'decay.R' must be positive");
  }
  if (j.contains("electric")) {
    if (!j.at("electric").is_array()) throw SchemaError("'electric' must be an array of terms");
    for (const auto& tj : j.at("electric")) {
      ElectricTerm t;
      if (!tj.contains("family") || !tj.at("family").is_string())
        throw SchemaError("each electric term needs a 'family' string");
      t.family = tj.at("family").get<std::string>();
      t.amplitude = read_num(tj, "amplitude", 1);
      t.center = read_pt(tj, "center", spec.dim);
      if (t.family == "gaussian") {
        t.sigma = read_num(tj, "sigma", 0, true);
        if (!(t.sigma > 0)) throw SchemaError("'sigma' must be positive");
      } else if (t.family == "well" || t.family == "bump") {
        t.radius = read_num(tj, "radius", 0, true);
        if (!(t.radius > 0)) throw SchemaError("'radius' must be positive");
      } else if (t.family == "homogeneous") {
        t.order = read_num(tj, "order", 0, true);
        t.l = int(read_num(tj, "l", 0));
        t.m = int(read_num(tj, "m", 0));
        if (spec.dim == 3 && std::abs(t.m) > t.l) throw SchemaError("harmonic needs |m| <= l");
        if (!(t.order > 0)) throw SchemaError("'order' must be positive");
      } else if (t.family == "table") {
        if (!tj.contains("r") || !tj.contains("v")) throw SchemaError("table term needs 'r' and 'v'");
        t.table_r = tj.at("r").get<std::vector<double>>();
        t.table_v = tj.at("v").get<std::vector<double>>();
        if (t.table_r.size() != t.table_v.size() || t.table_r.size() < 2)
          throw SchemaError("table arrays must have equal length >= 2");
        for (size_t i = 1; i < t.table_r.size(); ++i)
          if (t.table_r[i] <= t.table_r[i - 1]) throw SchemaError("table radii must increase");
      } else {
        throw SchemaError("unknown electric family: " + t.family);
      }
      spec.electric.push_back(std::move(t));
    }
  }
  if (j.contains("magnetic") && !j.at("magnetic").is_null()) {
    if (spec.dim != 3) throw SchemaError("magnetic fields require dimension 3");
    const auto& mj = j.at("magnetic");
    MagneticSpec m;
    if (!mj.contains("family") || !mj.at("family").is_string())
      throw SchemaError("magnetic spec needs a 'family' string");
    m.family = mj.at("family").get<std::string>();
    if (m.family != "curl_gaussian" && m.family != "radial_gaussian")
      throw SchemaError("unknown magnetic family: " + m.family);
    m.amplitude = read_pt(mj, "amplitude", 3);
    m.center = read_pt(mj, "center", 3);
    m.sigma = read_num(mj, "sigma", 0, true);
    if (!(m.sigma > 0)) throw SchemaError("'sigma' must be positive");
    spec.magnetic = m;
  }
  return spec;
}

nlohmann::json PotentialSpec::to_json() const {
  nlohmann::json j;
  j["dimension"] = dim;
  j["decay"] = {{"rho", rho}, {"C", C}, {"R", R}};
  j["electric"] = nlohmann::json::array();
  for (const auto& t : electric) {
    nlohmann::json tj;
    tj["family"] = t.family;
    tj["amplitude"] = t.amplitude;
    tj["center"] = {t.center[0], t.center[1], t.center[2]};
    if (t.family == "gaussian") tj["sigma"] = t.sigma;
    if (t.family == "well" || t.family == "bump") tj["radius"] = t.radius;
    if (t.family == "homogeneous") {
      tj["order"] = t.order;
      tj["l"] = t.l;
      tj["m"] = t.m;
    }
    if (t.family == "table") {
      tj["r"] = t.table_r;
      tj["v"] = t.table_v;
    }
    j["electric"].push_back(tj);
  }
  if (magnetic) {
    j["magnetic"] = {{"family", magnetic->family},
                     {"amplitude", {magnetic->amplitude[0], magnetic->amplitude[1], magnetic->amplitude[2]}},
                     {"center", {magnetic->center[0], magnetic->center[1], magnetic->center[2]}},
                     {"sigma", magnetic->sigma}};
  }
  return j;
}

double PotentialSpec::eval_V(const Pt& x) const {
  double v = 0;
  for (const auto& t : electric) v += eval_term(t, R, dim, x);
  return v;
}

Pt PotentialSpec::eval_B(const Pt& x) const {
  Pt b{};
  if (!magnetic) return b;
  const auto& m = *magnetic;
  Pt d = x - m.center;
  double g = std::exp(-dot(d, d) / (2 * m.sigma * m.sigma));
  if (m.family == "radial_gaussian") {
    // deliberately non-closed; exists to exercise the refusal paths
    return (m.amplitude[0] * g) * d;
  }
  // B = curl(a g) = grad g x a for the gaussian envelope g
  Pt gg = (-g / (m.sigma * m.sigma)) * d;
  return cross(gg, m.amplitude);
}

DecayReport validate_decay(const PotentialSpec& spec, int probes) {
  if (probes < 8) throw PreconditionError("validate_decay: need at least 8 rays");
  if (!(spec.rho > 1)) throw PreconditionError("validate_decay: rho must exceed 1");
  int degree = (spec.dim == 2) ? (probes + 1) / 2 : int(std::ceil(std::sqrt(double(probes))));
  DirectionGrid dirs = sphere_rule(spec.dim, degree);
  DecayReport rep;
  for (const auto& w : dirs.nodes) {
    for (int i = 0; i <= 24; ++i) {
      double r = spec.R * (1.0 + 3.0 * i / 24.0);
      Pt x = r * w;
      double ratio = std::abs(spec.eval_V(x)) * std::pow(1.0 + r, spec.rho) / spec.C;
      if (spec.magnetic) {
        double rf = norm(spec.eval_B(x)) * std::pow(1.0 + r, 1.0 + spec.rho) / spec.C;
        ratio = std::max(ratio, rf);
      }
      rep.worst = std::max(rep.worst, ratio);
    }
  }
  rep.pass = rep.worst <= 1.0 + 1e-12;
  return rep;
}

namespace {

void check_box(const PotentialSpec& spec, const Grid& g) {
  for (int d = 0; d < g.dim; ++d)
    if (g.lo[d] > -2 * spec.R + 1e-12 || g.hi(d) < 2 * spec.R - 1e-12)
      throw PreconditionError("sampling grid must contain the ball of radius 2R");
}

}  // namespace

SampledField sample_potential(const PotentialSpec& spec, const Grid& g) {
  if (g.dim != spec.dim) throw PreconditionError("sample: grid dimension mismatch");
  check_box(spec, g);
  SampledField f(g, 1, FieldRole::Potential);
  for (std::int64_t i = 0; i < g.npts(); ++i) f.a[i] = spec.eval_V(g.point_of_index(i));
  return f;
}

SampledField sample_field(const PotentialSpec& spec, const Grid& g) {
  if (g.dim != 3 || spec.dim != 3) throw PreconditionError("field sampling requires dimension 3");
  check_box(spec, g);
  SampledField f(g, 3, FieldRole::MagneticField);
  for (std::int64_t i = 0; i < g.npts(); ++i) {
    Pt b = spec.eval_B(g.point_of_index(i));
    for (int c = 0; c < 3; ++c) f.a[c * g.npts() + i] = b[c];
  }
  return f;
}

ExpansionSpec ExpansionSpec::from_json(const nlohmann::json& j) {
  ExpansionSpec e;
  if (!j.is_object() || !j.contains("terms") || !j.at("terms").is_array())
    throw SchemaError("expansion spec needs a 'terms' array");
  for (const auto& tj : j.at("terms")) {
    ExpansionTerm t;
    t.magnetic = tj.value("magnetic", false);
    t.order = read_num(tj, "order", 0, true);
    t.l = int(read_num(tj, "l", 0));
    t.m = int(read_num(tj, "m", 0));
    t.coeff = read_num(tj, "coeff", 0, true);
    e.terms.push_back(t);
  }
  e.finite_sum = j.value("finite_sum", true);
  e.validate();
  return e;
}

void ExpansionSpec::validate() const {
  double prev_e = 1, prev_m = 2;
  for (const auto& t : terms) {
    double& prev = t.magnetic ? prev_m : prev_e;
    if (!(t.order > prev))
      throw SchemaError(t.magnetic ? "magnetic orders must increase and exceed 2"
                                   : "electric orders must increase and exceed 1");
    prev = t.order;
  }
}

}  // namespace scatlab
