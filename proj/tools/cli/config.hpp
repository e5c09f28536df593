// Configuration files: a versioned YAML schema, parsed into the library's
// parameter structs with file:line diagnostics for every rejected value.
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "hmotor/dynamics.hpp"
#include "hmotor/harmonics.hpp"
#include "hmotor/identify.hpp"
#include "hmotor/induction.hpp"
#include "hmotor/presets.hpp"
#include "hmotor/saturation.hpp"

namespace hmotor::cli {

inline constexpr int kSchemaVersion = 1;

/// A file could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value, prefixed with its file and line.
class ConfigError : public ParameterError {
public:
    ConfigError(const std::string& location, std::string key, const std::string& what)
        : ParameterError(std::move(key), what),
          message_(location + ": " + std::string(ParameterError::what())) {}
    const char* what() const noexcept override { return message_.c_str(); }

private:
    std::string message_;
};

/// Marks of every key seen while parsing, for locating errors raised later
/// by the library (which only knows the bare parameter name).
struct SourceMap {
    std::string file;
    std::map<std::string, YAML::Mark> marks;

    [[nodiscard]] std::string at(const YAML::Mark& m) const {
        if (m.is_null()) return file;
        return file + ":" + std::to_string(m.line + 1);
    }

    /// Location of `path`, or of its closest recorded ancestor.
    [[nodiscard]] std::string locate(std::string path) const {
        while (!path.empty()) {
            if (auto it = marks.find(path); it != marks.end()) return at(it->second);
            const auto cut = path.find_last_of(".[ ");
            if (cut == std::string::npos) break;
            path.resize(cut);
        }
        return file;
    }
};

/// A YAML mapping being consumed key by key; finish() rejects whatever is left.
class Section {
public:
    Section(YAML::Node node, std::string path, SourceMap& src)
        : node_(std::move(node)), path_(std::move(path)), src_(&src) {
        if (!node_.IsMap()) fail_here("expected a mapping");
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            const auto key = it->first.as<std::string>();
            src_->marks[full(key)] = it->first.Mark();
        }
    }

    [[nodiscard]] const std::string& path() const { return path_; }
    [[nodiscard]] const YAML::Node& node() const { return node_; }

    [[nodiscard]] bool has(const std::string& key) const { return static_cast<bool>(child(key)); }

    /// Raw child node; marks the key as consumed.
    YAML::Node raw(const std::string& key) {
        used_.insert(key);
        return child(key);
    }

    double number(const std::string& key) {
        require_key(key);
        return to_number(raw(key), key);
    }
    double number(const std::string& key, double fallback) {
        return has(key) ? number(key) : fallback;
    }
    std::optional<double> maybe_number(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return number(key);
    }

    long long integer(const std::string& key) {
        require_key(key);
        return to_integer(raw(key), key);
    }
    long long integer(const std::string& key, long long fallback) {
        return has(key) ? integer(key) : fallback;
    }

    bool flag(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const YAML::Node n = raw(key);
        try {
            return n.as<bool>();
        } catch (const YAML::Exception&) {
            fail(key, n.Mark(), "expected true or false");
        }
    }

    std::string text(const std::string& key) {
        require_key(key);
        const YAML::Node n = raw(key);
        if (!n.IsScalar()) fail(key, n.Mark(), "expected a string");
        return n.as<std::string>();
    }
    std::string text(const std::string& key, const std::string& fallback) {
        return has(key) ? text(key) : fallback;
    }

    /// One of `choices`.
    std::string choice(const std::string& key, const std::vector<std::string>& choices,
                       const std::string& fallback) {
        if (!has(key)) return fallback;
        const std::string v = text(key);
        for (const auto& c : choices)
            if (c == v) return v;
        std::string list;
        for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c;
        fail(key, child(key).Mark(), "must be one of {" + list + "}, got '" + v + "'");
    }

    std::vector<double> numbers(const std::string& key) {
        require_key(key);
        const YAML::Node n = raw(key);
        if (!n.IsSequence()) fail(key, n.Mark(), "expected a list of numbers");
        std::vector<double> out;
        for (std::size_t k = 0; k < n.size(); ++k)
            out.push_back(to_number(n[k], key + "[" + std::to_string(k) + "]"));
        return out;
    }
    std::vector<double> numbers(const std::string& key, std::size_t size) {
        auto v = numbers(key);
        if (v.size() != size) {
            fail(key, child(key).Mark(),
                 "expected " + std::to_string(size) + " values, got " + std::to_string(v.size()));
        }
        return v;
    }

    Section section(const std::string& key) {
        require_key(key);
        return Section(raw(key), full(key), *src_);
    }
    std::optional<Section> maybe_section(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return section(key);
    }

    /// Elements of a list of mappings.
    std::vector<Section> sections(const std::string& key) {
        std::vector<Section> out;
        if (!has(key)) return out;
        const YAML::Node n = raw(key);
        if (!n.IsSequence()) fail(key, n.Mark(), "expected a list");
        for (std::size_t k = 0; k < n.size(); ++k) {
            const std::string p = full(key) + "[" + std::to_string(k) + "]";
            src_->marks[p] = n[k].Mark();
            out.emplace_back(n[k], p, *src_);
        }
        return out;
    }

    /// Fails on the first key nobody asked for.
    void finish() const {
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            const auto key = it->first.as<std::string>();
            if (!used_.contains(key)) fail(key, it->first.Mark(), "unknown key");
        }
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        const YAML::Node n = child(key);
        fail(key, n ? n.Mark() : node_.Mark(), what);
    }
    [[noreturn]] void fail(const std::string& key, const YAML::Mark& mark,
                           const std::string& what) const {
        throw ConfigError(src_->at(mark), full(key), what);
    }
    [[noreturn]] void fail_here(const std::string& what) const {
        throw ConfigError(src_->at(node_.Mark()), path_.empty() ? "<root>" : path_, what);
    }

private:
    /// Lookup through a const node, which never inserts.
    [[nodiscard]] YAML::Node child(const std::string& key) const {
        const YAML::Node& n = node_;
        return n[key];
    }
    std::string full(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }
    void require_key(const std::string& key) const {
        if (!has(key)) fail(key, node_.Mark(), "required key is missing");
    }
    double to_number(const YAML::Node& n, const std::string& key) const {
        double v = 0.0;
        try {
            if (!n.IsScalar()) throw YAML::Exception(n.Mark(), "not a scalar");
            v = n.as<double>();
        } catch (const YAML::Exception&) {
            fail(key, n.Mark(), "expected a number");
        }
        if (!std::isfinite(v)) fail(key, n.Mark(), "must be finite");
        return v;
    }
    long long to_integer(const YAML::Node& n, const std::string& key) const {
        try {
            if (!n.IsScalar()) throw YAML::Exception(n.Mark(), "not a scalar");
            return n.as<long long>();
        } catch (const YAML::Exception&) {
            fail(key, n.Mark(), "expected an integer");
        }
    }

    YAML::Node node_;
    std::string path_;
    SourceMap* src_;
    std::set<std::string> used_;
};

// -----------------------------------------------------------------------------
// Schema
// -----------------------------------------------------------------------------

enum class ModelKind { linear_pmsm, synrm, saturated_pmsm, harmonic_pmsm, linear_im };

struct ModelSpec {
    ModelKind kind = ModelKind::linear_pmsm;
    LinearPmsmParams linear;        ///< linear_pmsm, synrm
    SaturationCoefficients saturated;  ///< saturated_pmsm
    HarmonicModel harmonic;         ///< harmonic_pmsm
    ImParams induction;             ///< linear_im

    [[nodiscard]] bool is_induction() const { return kind == ModelKind::linear_im; }

    [[nodiscard]] ModelPtr build() const {
        switch (kind) {
            case ModelKind::linear_pmsm: return std::make_shared<LinearPmsm>(linear);
            case ModelKind::synrm: return std::make_shared<LinearPmsm>(synrm_energy(linear));
            case ModelKind::saturated_pmsm: return std::make_shared<SaturatedPmsm>(saturated);
            case ModelKind::harmonic_pmsm: return std::make_shared<HarmonicPmsm>(harmonic);
            case ModelKind::linear_im: return std::make_shared<InductionMachine>(induction);
        }
        throw ParameterError("model.kind", "unhandled kind");
    }

    [[nodiscard]] double phi_M() const {
        switch (kind) {
            case ModelKind::linear_pmsm:
            case ModelKind::synrm: return linear.phi_M;
            case ModelKind::saturated_pmsm: return saturated.phi_M;
            case ModelKind::harmonic_pmsm: return harmonic.base.phi_M;
            case ModelKind::linear_im: return 0.0;
        }
        return 0.0;
    }

    /// Coefficients whose polynomial validity box applies, if any.
    [[nodiscard]] const SaturationCoefficients* polynomial() const {
        if (kind == ModelKind::saturated_pmsm) return &saturated;
        if (kind == ModelKind::harmonic_pmsm) return &harmonic.base;
        return nullptr;
    }
};

/// Initial state as written; missing entries fall back to the model defaults.
struct InitialSpec {
    double theta = 0.0;
    std::optional<double> rho;
    std::optional<double> omega;  ///< electrical speed, converted through kappa
    std::optional<std::vector<double>> phi;
    double theta_s = 0.0;
};

struct RippleSpec {
    enum class Mode { sweep, trajectory } mode = Mode::sweep;
    int points = 360;
    double theta_start = 0.0;
    double theta_span = 2.0 * std::numbers::pi;
    std::optional<double> rho;
    std::optional<double> omega;
    std::optional<Eigen::Vector2d> phi;
    double v_s0 = 0.0;
};

struct FluxMapSpec {
    GridSpec grid;
    double theta = 0.0;
    double noise = 0.0;
};

struct IdentifySpec {
    std::string samples;  ///< resolved against the config directory
    std::optional<double> phi_M;
    bool refine_phi_M = false;
    Covariance covariance = Covariance::classical;
};

struct ValidateSpec {
    std::size_t samples = 10000;
    double tolerance = 1e-10;
};

struct SweepSpec {
    std::string parameter;  ///< dotted path into the config, e.g. model.params.R_s
    std::vector<double> values;
    unsigned jobs = 0;
};

struct Config {
    SourceMap source;
    YAML::Node document;  ///< kept for sweeps, which rewrite one value and re-parse
    std::optional<ModelSpec> model;
    Drive drive;
    std::optional<SimConfig> sim;
    Frame frame = Frame::rotating;
    InitialSpec initial;
    std::optional<RippleSpec> ripple;
    std::optional<FluxMapSpec> flux_map;
    std::optional<IdentifySpec> identify;
    ValidateSpec validate;
    std::optional<SweepSpec> sweep;
    std::uint64_t seed = 1;
    std::vector<std::string> warnings;

    [[nodiscard]] const ModelSpec& require_model() const {
        if (!model) throw ConfigError(source.file, "model", "this command needs a model section");
        return *model;
    }
    [[nodiscard]] const SimConfig& require_sim() const {
        if (!sim) throw ConfigError(source.file, "sim", "this command needs a sim section");
        return *sim;
    }

    /// Initial state in the model's flux coordinates.
    [[nodiscard]] MachineState initial_state(const EnergyModel& m) const {
        const ModelSpec& spec = require_model();
        MachineState s;
        s.theta = initial.theta;
        if (initial.phi) {
            s.phi = Eigen::Map<const Eigen::VectorXd>(initial.phi->data(),
                                                      static_cast<Eigen::Index>(initial.phi->size()));
        } else if (spec.is_induction()) {
            s.phi = Eigen::VectorXd::Zero(4);
        } else {
            s.phi = Eigen::Vector2d(spec.phi_M(), 0.0);
        }
        s.rho = initial.rho.value_or(0.0);
        if (initial.omega) s.rho = *initial.omega / m.d_rho(0.0, 1.0, Eigen::VectorXd::Zero(m.flux_dim()));
        return s;
    }
};

// -----------------------------------------------------------------------------
// Parsing
// -----------------------------------------------------------------------------

namespace detail {

inline double kinetic_from(Section& model, int n_p) {
    if (model.has("kinetic_coeff")) {
        if (model.has("inertia") || model.has("kinetic_convention")) {
            model.fail("kinetic_coeff", "give either kinetic_coeff or inertia/kinetic_convention");
        }
        const double k = model.number("kinetic_coeff");
        if (!(k > 0.0)) model.fail("kinetic_coeff", "must be > 0");
        return k;
    }
    const double j = model.number("inertia", presets::kInertia);
    if (!(j > 0.0)) model.fail("inertia", "must be > 0");
    const auto conv = model.choice("kinetic_convention", {"standard", "literal"}, "standard");
    return kinetic_coeff(j, n_p,
                         conv == "literal" ? KineticConvention::literal : KineticConvention::standard);
}

inline int pole_pairs(Section& p) {
    const long long n = p.integer("n_p");
    if (n <= 0 || n > 1000) p.fail("n_p", "must be a positive integer");
    return static_cast<int>(n);
}

inline FluxPolynomial polynomial(Section& term, const std::string& key) {
    FluxPolynomial poly;
    if (!term.has(key)) return poly;
    const YAML::Node list = term.raw(key);
    if (!list.IsSequence()) term.fail(key, list.Mark(), "expected a list of [i, j, value] triples");
    for (std::size_t n = 0; n < list.size(); ++n) {
        const YAML::Node e = list[n];
        const std::string where = key + "[" + std::to_string(n) + "]";
        if (!e.IsSequence() || e.size() != 3) term.fail(where, e.Mark(), "expected [i, j, value]");
        int i = 0, j = 0;
        double v = 0.0;
        try {
            i = e[0].as<int>();
            j = e[1].as<int>();
            v = e[2].as<double>();
        } catch (const YAML::Exception&) {
            term.fail(where, e.Mark(), "expected [integer, integer, number]");
        }
        if (!std::isfinite(v)) term.fail(where, e.Mark(), "must be finite");
        try {
            poly.set(i, j, v);
        } catch (const ParameterError& err) {
            term.fail(where, e.Mark(), err.what());
        }
    }
    return poly;
}

/// The saturated PMSM block shared by saturated_pmsm and harmonic_pmsm.
inline SaturationCoefficients saturation_block(Section& p, Section& model) {
    SaturationCoefficients c;
    c.phi_M = p.number("phi_M");
    if (!(c.phi_M > 0.0)) p.fail("phi_M", "must be > 0");
    c.n_p = pole_pairs(p);
    c.R_s = p.number("R_s", 0.0);
    c.kinetic_coeff = kinetic_from(model, c.n_p);
    const bool scaled = p.flag("scaled", false);

    std::array<double, 7> mag{};
    for (std::size_t k = 0; k < 2; ++k) {
        const std::string inv(kMagneticNames[k]);
        const std::string ind = k == 0 ? "L_d" : "L_q";
        if (scaled && p.has(ind)) {
            p.fail(ind, "not accepted with scaled: true; give " + inv + " as phi_M^2/" + ind);
        }
        if (!scaled && p.has(ind)) {
            if (p.has(inv)) p.fail(ind, "give either " + ind + " or " + inv);
            const double l = p.number(ind);
            if (!(l > 0.0)) p.fail(ind, "must be > 0");
            mag[k] = 1.0 / l;
        } else {
            mag[k] = p.number(inv);
        }
    }
    for (std::size_t k = 2; k < 7; ++k) mag[k] = p.number(std::string(kMagneticNames[k]), 0.0);
    c.set_magnetic(scaled ? from_scaled(mag, c.phi_M) : mag);
    return c;
}

inline ModelSpec model(Section& m) {
    ModelSpec spec;
    const std::string kind = m.choice(
        "kind", {"linear_pmsm", "synrm", "saturated_pmsm", "harmonic_pmsm", "linear_im"}, "");
    if (kind.empty()) m.fail("kind", m.node().Mark(), "required key is missing");
    Section p = m.section("params");

    if (kind == "linear_pmsm" || kind == "synrm") {
        spec.kind = kind == "synrm" ? ModelKind::synrm : ModelKind::linear_pmsm;
        auto& l = spec.linear;
        l.L_d = p.number("L_d");
        l.L_q = p.number("L_q");
        l.phi_M = spec.kind == ModelKind::synrm ? 0.0 : p.number("phi_M");
        l.n_p = pole_pairs(p);
        l.R_s = p.number("R_s", 0.0);
        l.kinetic_coeff = kinetic_from(m, l.n_p);
    } else if (kind == "saturated_pmsm") {
        spec.kind = ModelKind::saturated_pmsm;
        spec.saturated = saturation_block(p, m);
    } else if (kind == "harmonic_pmsm") {
        spec.kind = ModelKind::harmonic_pmsm;
        auto& h = spec.harmonic;
        h.base = saturation_block(p, m);
        for (auto& t : p.sections("harmonics")) {
            HarmonicTerm term;
            const long long k = t.integer("k");
            if (k <= 0 || k > 1000) t.fail("k", "harmonic index must be a positive integer");
            term.k = static_cast<int>(k);
            term.a = polynomial(t, "a");
            term.b = polynomial(t, "b");
            t.finish();
            h.terms.push_back(term);
        }
        if (p.has("zero_axis")) {
            std::vector<ZeroAxisTerm> zs;
            for (auto& z : p.sections("zero_axis")) {
                ZeroAxisTerm term;
                const long long mm = z.integer("m");
                if (mm <= 0 || mm > 1000) z.fail("m", "must be a positive integer");
                term.m = static_cast<int>(mm);
                term.c = z.number("c", 0.0);
                term.s = z.number("s", 0.0);
                z.finish();
                zs.push_back(term);
            }
            h.zero_axis = std::move(zs);
        }
    } else {
        spec.kind = ModelKind::linear_im;
        auto& q = spec.induction;
        q.L_s = p.number("L_s");
        q.L_r = p.number("L_r");
        q.L_m = p.number("L_m");
        q.R_s = p.number("R_s", 0.0);
        q.R_r = p.number("R_r", 0.0);
        q.n_p = pole_pairs(p);
        q.kinetic_coeff = kinetic_from(m, q.n_p);
    }
    p.finish();
    m.finish();
    return spec;
}

inline Drive drive(Section& d) {
    Drive out;
    if (auto v = d.maybe_section("voltage")) {
        const auto type = v->choice("type", {"constant", "dq_sinusoid", "three_phase", "table"},
                                    "constant");
        if (type == "constant") {
            out.voltage = ConstantVoltage{{v->number("u_d", 0.0), v->number("u_q", 0.0)}};
        } else if (type == "dq_sinusoid") {
            DqSinusoid s;
            const auto off = v->has("offset") ? v->numbers("offset", 2) : std::vector<double>{0, 0};
            const auto amp = v->numbers("amplitude", 2);
            s.offset = {off[0], off[1]};
            s.amplitude = {amp[0], amp[1]};
            s.frequency = v->number("frequency");
            s.phase = v->number("phase", 0.0);
            out.voltage = s;
        } else if (type == "three_phase") {
            ThreePhaseSinusoid s;
            s.amplitude = v->number("amplitude");
            s.frequency = v->number("frequency");
            s.phase = v->number("phase", 0.0);
            out.voltage = s;
        } else {
            VoltageTable tab;
            tab.t = v->numbers("t");
            const auto ud = v->numbers("u_d", tab.t.size());
            const auto uq = v->numbers("u_q", tab.t.size());
            if (tab.t.empty()) v->fail("t", "table must have at least one row");
            for (std::size_t k = 0; k < tab.t.size(); ++k) tab.u_dq.emplace_back(ud[k], uq[k]);
            out.voltage = tab;
        }
        v->finish();
    }
    if (auto l = d.maybe_section("load")) {
        const auto type = l->choice("type", {"constant", "linear", "table"}, "constant");
        if (type == "constant") {
            out.load = ConstantLoad{l->number("torque", 0.0)};
        } else if (type == "linear") {
            out.load = LinearLoad{l->number("torque", 0.0), l->number("slope")};
        } else {
            LoadTable tab;
            tab.t = l->numbers("t");
            tab.torque = l->numbers("torque", tab.t.size());
            if (tab.t.empty()) l->fail("t", "table must have at least one row");
            out.load = tab;
        }
        l->finish();
    }
    d.finish();
    return out;
}

inline std::optional<double> speed_pair(Section& s, std::optional<double>& omega) {
    if (s.has("rho") && s.has("omega")) s.fail("omega", "give either rho or omega");
    omega = s.maybe_number("omega");
    return s.maybe_number("rho");
}

}  // namespace detail

/// Location-aware rethrow of a library ParameterError raised for `section`.
[[noreturn]] inline void relocate(const SourceMap& src, const std::string& section,
                                  const ParameterError& e) {
    std::string key = e.key();
    for (const auto& [from, to] : {std::pair{"terms", "harmonics"}, std::pair{"zero_axis", "zero_axis"}}) {
        if (key.rfind(from, 0) == 0 && key.size() > std::string(from).size() &&
            key[std::string(from).size()] == '[') {
            key = std::string(to) + key.substr(std::string(from).size());
        }
    }
    // every model-level key is validated before construction, so whatever the
    // library rejects lives in the params block
    const std::string path = section + (section == "model" ? ".params." : ".") + key;
    const std::string what = std::string(e.what()).substr(e.key().size() + 2);
    throw ConfigError(src.locate(path), path, what);
}

/// Parses an already-loaded document. `file` names it in diagnostics and
/// anchors relative paths.
inline Config parse_config(const YAML::Node& doc, const std::string& file) {
    Config cfg;
    cfg.source.file = file;
    cfg.document = YAML::Clone(doc);
    if (!doc || doc.IsNull()) throw ConfigError(file, "<root>", "configuration is empty");
    Section root(doc, "", cfg.source);

    const long long version = root.integer("schema_version");
    if (version != kSchemaVersion) {
        root.fail("schema_version", "unsupported version " + std::to_string(version) +
                                        " (this build reads " + std::to_string(kSchemaVersion) + ")");
    }
    if (root.has("seed")) {
        const long long s = root.integer("seed");
        if (s < 0) root.fail("seed", "must be >= 0");
        cfg.seed = static_cast<std::uint64_t>(s);
    }

    if (auto m = root.maybe_section("model")) {
        cfg.model = detail::model(*m);
        try {
            (void)cfg.model->build();
        } catch (const ParameterError& e) {
            relocate(cfg.source, "model", e);
        }
    }

    if (auto d = root.maybe_section("drive")) {
        cfg.drive = detail::drive(*d);
        try {
            validate_drive(cfg.drive);
        } catch (const ParameterError& e) {
            throw ConfigError(cfg.source.locate(e.key()), e.key(),
                              std::string(e.what()).substr(e.key().size() + 2));
        }
    }

    if (auto s = root.maybe_section("sim")) {
        SimConfig sim;
        sim.dt = s->number("dt", sim.dt);
        sim.t_end = s->number("t_end");
        const auto integ = s->choice("integrator", {"rk4", "euler"}, "rk4");
        sim.integrator = integ == "euler" ? Integrator::euler : Integrator::rk4;
        const long long stride = s->integer("record_stride", 1);
        if (stride <= 0 || stride > 1'000'000'000) s->fail("record_stride", "must be a positive integer");
        sim.record_stride = static_cast<int>(stride);
        sim.omega_s = s->number("omega_s", 0.0);
        cfg.frame = s->choice("frame", {"rotating", "stationary"}, "rotating") == "stationary"
                        ? Frame::stationary
                        : Frame::rotating;
        s->finish();
        try {
            sim.validate();
        } catch (const ParameterError& e) {
            throw ConfigError(cfg.source.locate(e.key()), e.key(),
                              std::string(e.what()).substr(e.key().size() + 2));
        }
        if (sim.steps() > 2'000'000'000L) s->fail("t_end", "more than 2e9 steps requested");
        if (cfg.model && cfg.model->is_induction() && cfg.frame == Frame::stationary)
            s->fail("frame", "the induction machine is simulated in its synchronous frame only");
        if (cfg.model && !cfg.model->is_induction() && sim.omega_s != 0.0)
            s->fail("omega_s", "only meaningful for the induction machine");
        cfg.sim = sim;
    }

    if (auto s = root.maybe_section("initial")) {
        cfg.initial.theta = s->number("theta", 0.0);
        cfg.initial.rho = detail::speed_pair(*s, cfg.initial.omega);
        if (s->has("phi")) {
            cfg.initial.phi = s->numbers("phi");
            const std::size_t want = cfg.model && cfg.model->is_induction() ? 4 : 2;
            if (cfg.initial.phi->size() != want) {
                s->fail("phi", "expected " + std::to_string(want) + " flux components for this model");
            }
        }
        cfg.initial.theta_s = s->number("theta_s", 0.0);
        s->finish();
    }

    if (auto s = root.maybe_section("ripple")) {
        RippleSpec r;
        r.mode = s->choice("mode", {"sweep", "trajectory"}, "sweep") == "trajectory"
                     ? RippleSpec::Mode::trajectory
                     : RippleSpec::Mode::sweep;
        const long long pts = s->integer("points", r.points);
        if (pts < 2 || pts > 100'000'000) s->fail("points", "must be between 2 and 1e8");
        r.points = static_cast<int>(pts);
        r.theta_start = s->number("theta_start", r.theta_start);
        r.theta_span = s->number("theta_span", r.theta_span);
        if (r.theta_span < std::numbers::pi / 3.0 * (1.0 - 1e-12))
            s->fail("theta_span", "must cover at least one ripple period pi/3");
        r.rho = detail::speed_pair(*s, r.omega);
        if (s->has("phi")) {
            const auto phi = s->numbers("phi", 2);
            r.phi = Eigen::Vector2d(phi[0], phi[1]);
        }
        r.v_s0 = s->number("v_s0", 0.0);
        s->finish();
        cfg.ripple = r;
    }

    if (auto s = root.maybe_section("flux_map")) {
        FluxMapSpec f;
        const auto axis = [&](const std::string& key, double& lo, double& hi, int& n) {
            const auto v = s->numbers(key, 3);
            if (!(v[1] >= v[0])) s->fail(key, "expected [min, max, count] with max >= min");
            if (v[2] < 1 || v[2] > 1e6 || v[2] != std::floor(v[2]))
                s->fail(key, "count must be a positive integer");
            lo = v[0];
            hi = v[1];
            n = static_cast<int>(v[2]);
        };
        axis("phi_d", f.grid.phi_d_min, f.grid.phi_d_max, f.grid.n_d);
        axis("phi_q", f.grid.phi_q_min, f.grid.phi_q_max, f.grid.n_q);
        f.theta = s->number("theta", 0.0);
        f.noise = s->number("noise", 0.0);
        if (f.noise < 0.0) s->fail("noise", "must be >= 0");
        s->finish();
        cfg.flux_map = f;
    }

    if (auto s = root.maybe_section("identify")) {
        IdentifySpec id;
        if (s->has("samples")) {
            const std::filesystem::path p(s->text("samples"));
            const auto base = std::filesystem::path(file).parent_path();
            id.samples = (p.is_relative() && !base.empty() ? base / p : p).string();
        }
        id.phi_M = s->maybe_number("phi_M");
        if (id.phi_M && !(*id.phi_M > 0.0)) s->fail("phi_M", "must be > 0");
        id.refine_phi_M = s->flag("refine_phi_M", false);
        id.covariance = s->choice("covariance", {"classical", "robust"}, "classical") == "robust"
                            ? Covariance::robust
                            : Covariance::classical;
        s->finish();
        cfg.identify = id;
    }

    if (auto s = root.maybe_section("validate")) {
        const long long n = s->integer("samples", 10000);
        if (n <= 0 || n > 100'000'000) s->fail("samples", "must be between 1 and 1e8");
        cfg.validate.samples = static_cast<std::size_t>(n);
        cfg.validate.tolerance = s->number("tolerance", cfg.validate.tolerance);
        if (!(cfg.validate.tolerance > 0.0)) s->fail("tolerance", "must be > 0");
        s->finish();
    }

    if (auto s = root.maybe_section("sweep")) {
        SweepSpec sw;
        sw.parameter = s->text("parameter");
        sw.values = s->numbers("values");
        if (sw.values.empty()) s->fail("values", "must not be empty");
        const long long jobs = s->integer("jobs", 0);
        if (jobs < 0 || jobs > 1024) s->fail("jobs", "must be between 0 and 1024");
        sw.jobs = static_cast<unsigned>(jobs);
        s->finish();
        cfg.sweep = sw;
    }

    root.finish();

    // Operating points outside the measured range of a saturation polynomial are
    // allowed but flagged.
    if (cfg.model) {
        if (const auto* c = cfg.model->polynomial()) {
            const auto check = [&](const Eigen::Vector2d& phi, const std::string& what) {
                if (outside_validity_box(*c, phi)) {
                    cfg.warnings.push_back(what + " lies outside the validity box |phi_d - phi_M|, |phi_q| <= phi_M"
                                           " of the saturation polynomial");
                }
            };
            if (cfg.initial.phi) check({(*cfg.initial.phi)[0], (*cfg.initial.phi)[1]}, "initial.phi");
            if (cfg.ripple && cfg.ripple->phi) check(*cfg.ripple->phi, "ripple.phi");
            if (cfg.flux_map) {
                const auto& g = cfg.flux_map->grid;
                if (outside_validity_box(*c, {g.phi_d_min, g.phi_q_min}) ||
                    outside_validity_box(*c, {g.phi_d_max, g.phi_q_max})) {
                    cfg.warnings.push_back(
                        "flux_map grid extends outside the validity box of the saturation polynomial");
                }
            }
        }
    }
    return cfg;
}

inline Config load_config(const std::string& path) {
    YAML::Node doc;
    try {
        doc = YAML::LoadFile(path);
    } catch (const YAML::BadFile&) {
        throw IoError("cannot read config '" + path + "'");
    } catch (const YAML::ParserException& e) {
        throw ConfigError(path + ":" + std::to_string(e.mark.line + 1), "<syntax>", e.msg);
    }
    return parse_config(doc, path);
}

/// Replaces the scalar at a dotted path (list elements as name[k]).
inline void set_path(YAML::Node root, const std::string& dotted, double value) {
    YAML::Node cur = root;
    std::size_t start = 0;
    while (true) {
        const auto dot = dotted.find('.', start);
        std::string part = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        std::optional<std::size_t> index;
        if (const auto br = part.find('['); br != std::string::npos && part.back() == ']') {
            index = std::stoul(part.substr(br + 1, part.size() - br - 2));
            part.resize(br);
        }
        if (part.empty() || !cur.IsMap() || !cur[part])
            throw ParameterError("sweep.parameter", "'" + dotted + "' does not name an existing key");
        YAML::Node next = cur[part];
        if (index) {
            if (!next.IsSequence() || *index >= next.size())
                throw ParameterError("sweep.parameter", "'" + dotted + "' index out of range");
            const YAML::Node elem = next[*index];
            next.reset(elem);
        }
        if (dot == std::string::npos) {
            if (!next.IsScalar())
                throw ParameterError("sweep.parameter", "'" + dotted + "' is not a scalar value");
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", value);
            next = std::string(buf);
            return;
        }
        cur.reset(next);
        start = dot + 1;
    }
}

}  // namespace hmotor::cli
