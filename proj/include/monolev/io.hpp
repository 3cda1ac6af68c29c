#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "flow.hpp"
#include "markov.hpp"
#include "measure.hpp"

namespace monolev {

using Json = nlohmann::json;

namespace detail {

[[noreturn]] inline void schema_fail(const std::string& path, const std::string& what) {
    fail(Errc::SchemaViolation, path + ": " + what);
}

inline double json_number(const Json& j, const std::string& path) {
    if (!j.is_number()) schema_fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) schema_fail(path, "expected a finite number");
    return v;
}

inline std::size_t json_count(const Json& j, const std::string& path) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) schema_fail(path, "expected a non-negative integer");
    const auto v = j.get<long long>();
    if (v < 0) schema_fail(path, "expected a non-negative integer");
    return static_cast<std::size_t>(v);
}

inline void reject_unknown_keys(const Json& j, const std::string& path, std::initializer_list<const char*> known) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) schema_fail(path + "." + key, "unknown field");
    }
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

/// {atoms: [[pos, mass], ...], grid: {lo, hi, n}, density: [...]}; atoms or grid+density may be absent.
inline DiscretizedMeasure measure_from_json(const Json& j, bool probability = true, const std::string& path = "$") {
    if (!j.is_object()) detail::schema_fail(path, "expected a measure object");
    detail::reject_unknown_keys(j, path, {"atoms", "grid", "density"});
    std::vector<Atom> atoms;
    if (j.contains("atoms")) {
        const Json& ja = j["atoms"];
        if (!ja.is_array()) detail::schema_fail(path + ".atoms", "expected an array of [pos, mass]");
        for (std::size_t i = 0; i < ja.size(); ++i) {
            const std::string p = path + ".atoms[" + std::to_string(i) + "]";
            if (!ja[i].is_array() || ja[i].size() != 2) detail::schema_fail(p, "expected [pos, mass]");
            atoms.push_back({detail::json_number(ja[i][0], p + "[0]"), detail::json_number(ja[i][1], p + "[1]")});
        }
    }
    std::optional<DensityGrid> density;
    if (j.contains("grid") != j.contains("density"))
        detail::schema_fail(path + (j.contains("grid") ? ".density" : ".grid"), "grid and density must appear together");
    if (j.contains("grid")) {
        const Json& g = j["grid"];
        const std::string gp = path + ".grid";
        if (!g.is_object()) detail::schema_fail(gp, "expected {lo, hi, n}");
        detail::reject_unknown_keys(g, gp, {"lo", "hi", "n"});
        for (const char* k : {"lo", "hi", "n"})
            if (!g.contains(k)) detail::schema_fail(gp + "." + k, "missing field");
        DensityGrid d;
        d.lo = detail::json_number(g["lo"], gp + ".lo");
        d.hi = detail::json_number(g["hi"], gp + ".hi");
        const std::size_t n = detail::json_count(g["n"], gp + ".n");
        if (!(d.lo < d.hi)) detail::schema_fail(gp, "lo must be below hi");
        if (n < 2) detail::schema_fail(gp + ".n", "need at least two nodes");
        const Json& jd = j["density"];
        if (!jd.is_array() || jd.size() != n)
            detail::schema_fail(path + ".density", "expected an array of " + std::to_string(n) + " values");
        for (std::size_t i = 0; i < n; ++i)
            d.values.push_back(detail::json_number(jd[i], path + ".density[" + std::to_string(i) + "]"));
        density = std::move(d);
    }
    try {
        return make_measure(std::move(atoms), std::move(density), probability);
    } catch (const Error& e) {
        detail::schema_fail(path, e.what());
    }
}

inline Json measure_to_json(const DiscretizedMeasure& mu) {
    Json j = Json::object();
    Json atoms = Json::array();
    for (const auto& a : mu.atoms()) atoms.push_back({a.position, a.mass});
    j["atoms"] = atoms;
    if (const auto& d = mu.density()) {
        j["grid"] = {{"lo", d->lo}, {"hi", d->hi}, {"n", d->size()}};
        j["density"] = d->values;
    }
    return j;
}

/// {a: real, rho: <measure object>}; rho is a finite measure, not normalized.
inline CharacteristicPair pair_from_json(const Json& j, const std::string& path = "$") {
    if (!j.is_object()) detail::schema_fail(path, "expected a pair object {a, rho}");
    detail::reject_unknown_keys(j, path, {"a", "rho"});
    const double a = j.contains("a") ? detail::json_number(j["a"], path + ".a") : 0.0;
    std::optional<DiscretizedMeasure> rho;
    if (j.contains("rho") && !j["rho"].is_null()) rho = measure_from_json(j["rho"], false, path + ".rho");
    try {
        return make_characteristic_pair(a, std::move(rho));
    } catch (const Error& e) {
        detail::schema_fail(path, e.what());
    }
}

inline Json pair_to_json(const CharacteristicPair& p) {
    Json j = {{"a", p.a}};
    if (p.rho) j["rho"] = measure_to_json(*p.rho);
    return j;
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), Errc::InvalidArgument, "cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        fail(Errc::SchemaViolation, path + ": " + e.what());
    }
}

inline DiscretizedMeasure load_measure_file(const std::string& path) { return measure_from_json(read_json_file(path)); }
inline CharacteristicPair load_pair_file(const std::string& path) { return pair_from_json(read_json_file(path)); }

/// `# atom pos mass` comment lines, then `x,density` rows.
inline std::string measure_csv(const DiscretizedMeasure& mu) {
    std::string out;
    for (const auto& a : mu.atoms()) out += "# atom " + detail::fmt(a.position) + " " + detail::fmt(a.mass) + "\n";
    out += "x,density\n";
    if (const auto& d = mu.density())
        for (std::size_t j = 0; j < d->size(); ++j) out += detail::fmt(d->node(j)) + "," + detail::fmt(d->values[j]) + "\n";
    return out;
}

inline DiscretizedMeasure measure_from_csv(const std::string& text, bool probability = true) {
    std::istringstream in(text);
    std::string line;
    std::vector<Atom> atoms;
    std::vector<double> xs, ys;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# atom ", 0) == 0) {
            std::istringstream ls(line.substr(7));
            Atom a;
            require(static_cast<bool>(ls >> a.position >> a.mass), Errc::SchemaViolation, "bad atom line: " + line);
            atoms.push_back(a);
        } else if (line[0] == '#' || line == "x,density") {
            continue;
        } else {
            const auto comma = line.find(',');
            require(comma != std::string::npos, Errc::SchemaViolation, "bad density row: " + line);
            xs.push_back(std::stod(line.substr(0, comma)));
            ys.push_back(std::stod(line.substr(comma + 1)));
        }
    }
    std::optional<DensityGrid> d;
    if (xs.size() >= 2) d = DensityGrid{xs.front(), xs.back(), ys};
    return make_measure(std::move(atoms), std::move(d), probability);
}

/// `path_id,t,x`, one row per path and time.
inline std::string path_csv(const PathArray& paths) {
    std::string out = "path_id,t,x\n";
    for (std::size_t p = 0; p < paths.n_paths; ++p)
        for (std::size_t i = 0; i < paths.times.size(); ++i)
            out += std::to_string(p) + "," + detail::fmt(paths.times[i]) + "," + detail::fmt(paths.at(p, i)) + "\n";
    return out;
}

/// Writes through a sibling temporary file and renames it into place.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(static_cast<bool>(out), Errc::InvalidArgument, "cannot write " + tmp.string());
        out << content;
        out.flush();
        require(static_cast<bool>(out), Errc::InvalidArgument, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        fail(Errc::InvalidArgument, "cannot move output into " + path);
    }
}

}  // namespace monolev
