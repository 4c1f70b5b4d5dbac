#include "msbl/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "msbl/report_io.hpp"

namespace msbl {

using nlohmann::json;

json default_config() {
    auto cov = [](double c, double r) {
        return json{{"law", "power_decay"}, {"c", c}, {"r", r}, {"values", json::array()}};
    };
    return {
        {"model",
         {{"id", "linear_gaussian_default"},
          {"L_F", nullptr},
          {"L_G", nullptr},
          {"a", nullptr},
          {"c", nullptr},
          {"f1", nullptr},
          {"g1", nullptr},
          {"tau", 0.6},
          {"alpha", 0.1},
          {"beta", 0.95}}},
        {"noise", {{"q1", cov(1.0, 4.0)}, {"q2", cov(1.0, 2.0)}}},
        {"sim",
         {{"eps", 0.0625},
          {"T", 0.5},
          {"macro_dt", 1e-3},
          {"kappa", 0.025},
          {"m", 32},
          {"n_paths", 1},
          {"seed", 20240611},
          {"drive", "substep_average"}}},
        {"initial", {{"x0", {1.0}}, {"y0", {1.0}}}},
        {"strong",
         {{"eps_grid", {0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625}},
          {"p", 2.0},
          {"n_paths", 100},
          {"band", {0.4, 0.6}},
          {"bias_guard", true},
          {"probe_paths", 20}}},
        {"weak",
         {{"eps_grid", {0.25, 0.125, 0.0625, 0.03125, 0.015625}},
          {"phi", "sin_e1"},
          {"n_paths", 2000},
          {"band", {0.8, 1.2}},
          {"evaluation", "sup_grid"},
          {"bias_guard", true},
          {"probe_paths", 200}}},
        {"moments",
         {{"eps_grid", {0.25, 0.0625, 0.015625}}, {"p", 2.0}, {"n_paths", 200}, {"ratio_max", 1.2}}},
        {"galerkin", {{"eps", 0.0625}, {"m_list", {8, 16, 32}}, {"m_ref", 64}, {"n_paths", 50}}},
        {"fbar",
         {{"x", {1.0}}, {"m", 16}, {"burn_in", 0.0}, {"window", 200.0}, {"micro_dt", 1e-3}, {"path_id", 0}}},
        {"output", {{"dir", "runs"}}},
    };
}

namespace {

void merge_checked(json& base, const json& patch, const std::string& where) {
    if (!patch.is_object()) throw ConfigError("config: '" + where + "' must be an object");
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        const std::string key = where.empty() ? it.key() : where + "." + it.key();
        if (!base.contains(it.key())) throw ConfigError("config: unknown key '" + key + "'");
        json& slot = base[it.key()];
        if (slot.is_object())
            merge_checked(slot, it.value(), key);
        else
            slot = it.value();
    }
}

std::string line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

json parse_value(const std::string& raw) {
    try {
        return json::parse(raw);
    } catch (const json::parse_error&) {
        return json(raw);
    }
}

std::uint64_t parse_seed(const std::string& s, const char* what) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw ConfigError(std::string(what) + ": not an unsigned 64-bit integer: '" + s + "'");
    return v;
}

}  // namespace

RunConfig RunConfig::from_json(const json& overrides) {
    RunConfig cfg;
    cfg.doc_ = default_config();
    if (!overrides.is_null()) merge_checked(cfg.doc_, overrides, "");
    return cfg;
}

RunConfig RunConfig::load(const ConfigSources& src) {
    json overrides = json::object();
    if (src.file) {
        std::ifstream is(*src.file, std::ios::binary);
        if (!is) throw ConfigError("config: cannot open '" + *src.file + "'");
        std::stringstream ss;
        ss << is.rdbuf();
        const std::string text = ss.str();
        try {
            overrides = json::parse(text, nullptr, true, /*ignore_comments=*/true);
        } catch (const json::parse_error& e) {
            throw ConfigError("config: parse error in '" + *src.file + "' at " + line_col(text, e.byte) +
                              ": " + e.what());
        }
    }
    RunConfig cfg = from_json(overrides);
    for (const std::string& kv : src.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        json* slot = &cfg.doc_;
        std::size_t start = 0;
        while (true) {
            const auto dot = key.find('.', start);
            const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
            if (!slot->is_object() || !slot->contains(part))
                throw ConfigError("--set: unknown key '" + key + "'");
            slot = &(*slot)[part];
            if (dot == std::string::npos) break;
            start = dot + 1;
        }
        if (slot->is_object()) throw ConfigError("--set: '" + key + "' is a section, not a value");
        *slot = parse_value(kv.substr(eq + 1));
    }
    if (src.env_seed && !src.env_seed->empty())
        cfg.doc_["sim"]["seed"] = parse_seed(*src.env_seed, "MSBL_SEED");
    if (src.seed) cfg.doc_["sim"]["seed"] = *src.seed;
    return cfg;
}

std::string RunConfig::hash() const { return content_hash(doc_.dump()); }

const json& RunConfig::at(const std::string& dotted) const {
    const json* j = &doc_;
    std::size_t start = 0;
    while (true) {
        const auto dot = dotted.find('.', start);
        const std::string part = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!j->is_object() || !j->contains(part)) throw ConfigError("config: missing key '" + dotted + "'");
        j = &(*j)[part];
        if (dot == std::string::npos) return *j;
        start = dot + 1;
    }
}

double RunConfig::number(const std::string& dotted) const {
    const json& j = at(dotted);
    if (!j.is_number()) throw ConfigError("config: '" + dotted + "' must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError("config: '" + dotted + "' must be finite");
    return v;
}

std::size_t RunConfig::count(const std::string& dotted) const {
    const json& j = at(dotted);
    if (!j.is_number_integer() || j.get<long long>() < 0)
        throw ConfigError("config: '" + dotted + "' must be a non-negative integer");
    return j.get<std::size_t>();
}

bool RunConfig::flag(const std::string& dotted) const {
    const json& j = at(dotted);
    if (!j.is_boolean()) throw ConfigError("config: '" + dotted + "' must be true or false");
    return j.get<bool>();
}

std::string RunConfig::text(const std::string& dotted) const {
    const json& j = at(dotted);
    if (!j.is_string()) throw ConfigError("config: '" + dotted + "' must be a string");
    return j.get<std::string>();
}

std::vector<double> RunConfig::numbers(const std::string& dotted) const {
    const json& j = at(dotted);
    if (!j.is_array()) throw ConfigError("config: '" + dotted + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw ConfigError("config: '" + dotted + "' must be an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<double> RunConfig::eps_grid(const std::string& section) const {
    return numbers(section + ".eps_grid");
}

namespace {
CovSpec cov_from(const RunConfig& cfg, const std::string& key) {
    const std::string law = cfg.text(key + ".law");
    CovSpec c;
    if (law == "power_decay")
        c = CovSpec::power_decay(cfg.number(key + ".c"), cfg.number(key + ".r"));
    else if (law == "finite_rank")
        c = CovSpec::finite_rank(cfg.numbers(key + ".values"));
    else if (law == "zero")
        c = CovSpec::zero();
    else
        throw ConfigError("config: '" + key + ".law' must be power_decay, finite_rank or zero");
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("config: " + key + ": " + e.what());
    }
    return c;
}
}  // namespace

ModelSpec RunConfig::model() const {
    const std::string id = text("model.id");
    const json& mj = at("model");
    ModelSpec m;
    try {
        if (id == "linear_gaussian_default" || id == "linear_gaussian") {
            const double a = mj["a"].is_null() ? 1.0 : number("model.a");
            const double c = mj["c"].is_null() ? 1.0 : number("model.c");
            const std::string f1 = mj["f1"].is_null() ? "sin" : text("model.f1");
            const std::string g1 = mj["g1"].is_null() ? "identity" : text("model.g1");
            m = make_linear_gaussian(a, c, f1, g1);
            m.id = id;
        } else {
            for (const char* k : {"a", "c", "f1", "g1"})
                if (!mj[k].is_null())
                    throw ConfigError(std::string("config: model.") + k + " applies to the linear_gaussian family only");
            m = model_from_catalog(id);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: model: ") + e.what());
    }
    if (!mj["L_F"].is_null()) m.L_F = number("model.L_F");
    if (!mj["L_G"].is_null()) m.L_G = number("model.L_G");
    m.meta = {number("model.tau"), number("model.alpha"), number("model.beta")};
    m.q1 = cov_from(*this, "noise.q1");
    m.q2 = cov_from(*this, "noise.q2");
    return m;
}

SimParams RunConfig::sim() const {
    SimParams p;
    p.eps = number("sim.eps");
    p.T = number("sim.T");
    p.macro_dt = number("sim.macro_dt");
    p.kappa = number("sim.kappa");
    p.m = count("sim.m");
    p.n_paths = count("sim.n_paths");
    const json& seed = at("sim.seed");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
        throw ConfigError("config: 'sim.seed' must be an unsigned integer");
    p.master_seed = seed.get<std::uint64_t>();
    const std::string drive = text("sim.drive");
    if (drive == "substep_average")
        p.drive = SlowDrive::substep_average;
    else if (drive == "midpoint")
        p.drive = SlowDrive::midpoint;
    else
        throw ConfigError("config: 'sim.drive' must be substep_average or midpoint");
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: sim: ") + e.what());
    }
    return p;
}

SimParams RunConfig::sim_for(const std::string& section) const {
    SimParams p = sim();
    p.n_paths = count(section + ".n_paths");
    return p;
}

SineField RunConfig::x0(std::size_t m) const {
    std::vector<double> v = numbers("initial.x0");
    v.resize(m, 0.0);
    return SineField(std::move(v));
}

SineField RunConfig::y0(std::size_t m) const {
    std::vector<double> v = numbers("initial.y0");
    v.resize(m, 0.0);
    return SineField(std::move(v));
}

std::vector<double> parse_coefficient_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::vector<std::pair<std::size_t, double>> rows;
    bool first = true;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        auto to_num = [](const std::string& s, double& out) {
            const auto b = s.find_first_not_of(" \t"), e = s.find_last_not_of(" \t");
            if (b == std::string::npos) return false;
            auto [p, ec] = std::from_chars(s.data() + b, s.data() + e + 1, out);
            return ec == std::errc{} && p == s.data() + e + 1;
        };
        double a = 0.0, b = 0.0;
        const bool ok = (cells.size() == 1 && to_num(cells[0], a)) ||
                        (cells.size() == 2 && to_num(cells[0], a) && to_num(cells[1], b));
        if (!ok) {
            if (first) {
                first = false;
                continue;
            }
            throw ConfigError("coefficient CSV: cannot parse line " + std::to_string(lineno));
        }
        first = false;
        if (cells.size() == 1) {
            rows.emplace_back(rows.size() + 1, a);
        } else {
            if (a < 1.0 || a != std::floor(a))
                throw ConfigError("coefficient CSV: bad mode index on line " + std::to_string(lineno));
            rows.emplace_back(static_cast<std::size_t>(a), b);
        }
    }
    if (rows.empty()) throw ConfigError("coefficient CSV: no coefficients");
    std::size_t m = 0;
    for (auto& r : rows) m = std::max(m, r.first);
    std::vector<double> out(m, 0.0);
    for (auto& [k, v] : rows) {
        if (!std::isfinite(v)) throw ConfigError("coefficient CSV: non-finite value");
        out[k - 1] = v;
    }
    return out;
}

}  // namespace msbl
