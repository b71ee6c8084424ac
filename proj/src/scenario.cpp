#include "popdyn/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace popdyn {

namespace {

std::string fmt_num(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

struct RawEntry {
    std::string value;
    int line;
};

double parse_number(const std::string& v, int line, const std::string& key) {
    double out = 0.0;
    const char* begin = v.data();
    const char* end = v.data() + v.size();
    auto res = std::from_chars(begin, end, out);
    if (res.ec != std::errc() || res.ptr != end)
        throw std::invalid_argument("line " + std::to_string(line) + ": value for '" + key +
                                    "' is not a number: '" + v + "'");
    return out;
}

std::vector<double> parse_list(const std::string& v, int line, const std::string& key) {
    if (v.size() < 2 || v.front() != '[' || v.back() != ']')
        throw std::invalid_argument("line " + std::to_string(line) + ": value for '" + key +
                                    "' must be a [a, b, ...] list");
    std::vector<double> out;
    std::string inner = v.substr(1, v.size() - 2);
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(parse_number(item, line, key));
    }
    return out;
}

} // namespace

std::string to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::Riccati: return "riccati";
        case ScenarioKind::Kinetic: return "kinetic";
        case ScenarioKind::Ibm: return "ibm";
        case ScenarioKind::Pair: return "pair";
        case ScenarioKind::Occupation: return "occupation";
    }
    return "kinetic";
}

Scenario parse_scenario(const std::string& text) {
    std::map<std::string, RawEntry> entries;
    {
        std::stringstream ss(text);
        std::string raw;
        int line = 0;
        while (std::getline(ss, raw)) {
            ++line;
            const auto hash = raw.find('#');
            if (hash != std::string::npos) raw.erase(hash);
            const std::string stripped = trim(raw);
            if (stripped.empty()) continue;
            const auto eq = stripped.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("line " + std::to_string(line) +
                                            ": expected 'key = value', got '" + stripped + "'");
            const std::string key = trim(stripped.substr(0, eq));
            const std::string value = trim(stripped.substr(eq + 1));
            if (key.empty() || value.empty())
                throw std::invalid_argument("line " + std::to_string(line) +
                                            ": empty key or value");
            if (entries.count(key))
                throw std::invalid_argument("line " + std::to_string(line) +
                                            ": duplicate key '" + key + "'");
            entries[key] = {value, line};
        }
    }

    static const std::map<std::string, std::vector<std::string>> kRequired = {
        {"riccati", {"name", "kind", "a", "b", "alpha", "rho0", "t_end", "dt"}},
        {"kinetic",
         {"name", "kind", "L", "N", "a_plus", "a_minus", "b_plus", "b_minus", "rho0",
          "t_end", "dt", "snapshot_times"}},
        {"pair",
         {"name", "kind", "L", "N", "a_plus", "a_minus", "b_plus", "b_minus", "rho0",
          "t_end", "dt", "snapshot_times", "closure", "re_close"}},
        {"ibm",
         {"name", "kind", "L", "a_plus", "a_minus", "b_plus", "b_minus", "rho0", "t_end",
          "thinning", "seed", "replicas", "vessel", "burn_in"}},
        {"occupation", {"name", "kind", "kappa", "volume", "n_max"}},
    };
    static const std::map<std::string, std::vector<std::string>> kOptional = {
        {"riccati", {}},
        {"kinetic", {"steady_tol", "adaptive", "adaptive_tol"}},
        {"pair", {}},
        {"ibm", {}},
        {"occupation", {}},
    };

    const auto kind_it = entries.find("kind");
    if (kind_it == entries.end()) {
        std::string missing = "missing required field(s): name, kind";
        throw std::invalid_argument(missing);
    }
    const std::string kind_text = kind_it->second.value;
    if (!kRequired.count(kind_text))
        throw std::invalid_argument("line " + std::to_string(kind_it->second.line) +
                                    ": unknown kind '" + kind_text +
                                    "' (riccati, kinetic, ibm, pair, occupation)");

    const auto& required = kRequired.at(kind_text);
    const auto& optional = kOptional.at(kind_text);
    std::string missing;
    for (const auto& key : required)
        if (!entries.count(key)) missing += (missing.empty() ? "" : ", ") + key;
    if (!missing.empty())
        throw std::invalid_argument("missing required field(s): " + missing);
    for (const auto& [key, entry] : entries) {
        const bool known = std::find(required.begin(), required.end(), key) != required.end() ||
                           std::find(optional.begin(), optional.end(), key) != optional.end();
        if (!known)
            throw std::invalid_argument("line " + std::to_string(entry.line) +
                                        ": unknown key '" + key + "' for kind " + kind_text);
    }

    auto text_of = [&](const std::string& key) { return entries.at(key).value; };
    auto num_of = [&](const std::string& key) {
        return parse_number(entries.at(key).value, entries.at(key).line, key);
    };
    auto kernel_of = [&](const std::string& key, double period) {
        const auto& e = entries.at(key);
        try {
            return format_kernel(parse_kernel(e.value, period));
        } catch (const std::exception& ex) {
            throw std::invalid_argument("line " + std::to_string(e.line) + ": " + ex.what());
        }
    };

    Scenario s;
    s.name = text_of("name");
    if (kind_text == "riccati") {
        s.kind = ScenarioKind::Riccati;
        s.coeff_a = num_of("a");
        s.coeff_b = num_of("b");
        s.coeff_alpha = num_of("alpha");
        s.rho0_value = num_of("rho0");
        s.t_end = num_of("t_end");
        s.dt = num_of("dt");
        return s;
    }
    if (kind_text == "occupation") {
        s.kind = ScenarioKind::Occupation;
        s.kappa = num_of("kappa");
        s.volume = num_of("volume");
        s.n_max = static_cast<int>(num_of("n_max"));
        return s;
    }

    s.length = num_of("L");
    s.a_plus = kernel_of("a_plus", s.length);
    s.a_minus = kernel_of("a_minus", s.length);
    s.b_plus = kernel_of("b_plus", s.length);
    s.b_minus = kernel_of("b_minus", s.length);
    s.rho0 = kernel_of("rho0", s.length);
    s.t_end = num_of("t_end");

    if (kind_text == "ibm") {
        s.kind = ScenarioKind::Ibm;
        s.thinning = num_of("thinning");
        {
            const auto& e = entries.at("seed");
            std::uint64_t v = 0;
            auto res = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
            if (res.ec != std::errc() || res.ptr != e.value.data() + e.value.size())
                throw std::invalid_argument("line " + std::to_string(e.line) +
                                            ": seed must be an unsigned integer");
            s.seed = v;
        }
        s.replicas = static_cast<int>(num_of("replicas"));
        s.burn_in = num_of("burn_in");
        const auto& e = entries.at("vessel");
        const auto colon = e.value.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("line " + std::to_string(e.line) +
                                        ": vessel must be 'lo:hi'");
        s.vessel_lo = parse_number(trim(e.value.substr(0, colon)), e.line, "vessel");
        s.vessel_hi = parse_number(trim(e.value.substr(colon + 1)), e.line, "vessel");
        if (!(s.vessel_hi > s.vessel_lo))
            throw std::invalid_argument("line " + std::to_string(e.line) +
                                        ": vessel needs hi > lo");
        return s;
    }

    s.n_points = static_cast<int>(num_of("N"));
    s.dt = num_of("dt");
    {
        const auto& e = entries.at("snapshot_times");
        s.snapshot_times = parse_list(e.value, e.line, "snapshot_times");
    }

    if (kind_text == "kinetic") {
        s.kind = ScenarioKind::Kinetic;
        if (entries.count("steady_tol")) s.steady_tol = num_of("steady_tol");
        if (entries.count("adaptive")) {
            const auto& e = entries.at("adaptive");
            if (e.value == "true")
                s.adaptive = true;
            else if (e.value == "false")
                s.adaptive = false;
            else
                throw std::invalid_argument("line " + std::to_string(e.line) +
                                            ": adaptive must be true or false");
        }
        if (entries.count("adaptive_tol")) s.adaptive_tol = num_of("adaptive_tol");
        return s;
    }

    s.kind = ScenarioKind::Pair;
    {
        const auto& e = entries.at("closure");
        if (e.value == "meanfield")
            s.closure = ClosureRule::MeanField;
        else if (e.value == "kirkwood")
            s.closure = ClosureRule::Kirkwood;
        else
            throw std::invalid_argument("line " + std::to_string(e.line) +
                                        ": closure must be meanfield or kirkwood");
    }
    {
        const auto& e = entries.at("re_close");
        if (e.value == "true")
            s.re_close = true;
        else if (e.value == "false")
            s.re_close = false;
        else
            throw std::invalid_argument("line " + std::to_string(e.line) +
                                        ": re_close must be true or false");
    }
    return s;
}

std::string serialize_scenario(const Scenario& s) {
    std::string out;
    auto kv = [&](const std::string& key, const std::string& value) {
        out += key + " = " + value + "\n";
    };
    kv("name", s.name);
    kv("kind", to_string(s.kind));
    switch (s.kind) {
        case ScenarioKind::Riccati:
            kv("a", fmt_num(s.coeff_a));
            kv("b", fmt_num(s.coeff_b));
            kv("alpha", fmt_num(s.coeff_alpha));
            kv("rho0", fmt_num(s.rho0_value));
            kv("t_end", fmt_num(s.t_end));
            kv("dt", fmt_num(s.dt));
            break;
        case ScenarioKind::Occupation:
            kv("kappa", fmt_num(s.kappa));
            kv("volume", fmt_num(s.volume));
            kv("n_max", fmt_num(s.n_max));
            break;
        case ScenarioKind::Ibm:
            kv("L", fmt_num(s.length));
            kv("a_plus", s.a_plus);
            kv("a_minus", s.a_minus);
            kv("b_plus", s.b_plus);
            kv("b_minus", s.b_minus);
            kv("rho0", s.rho0);
            kv("t_end", fmt_num(s.t_end));
            kv("thinning", fmt_num(s.thinning));
            kv("seed", std::to_string(s.seed));
            kv("replicas", fmt_num(s.replicas));
            kv("vessel", fmt_num(s.vessel_lo) + ":" + fmt_num(s.vessel_hi));
            kv("burn_in", fmt_num(s.burn_in));
            break;
        case ScenarioKind::Kinetic:
        case ScenarioKind::Pair: {
            kv("L", fmt_num(s.length));
            kv("N", fmt_num(s.n_points));
            kv("a_plus", s.a_plus);
            kv("a_minus", s.a_minus);
            kv("b_plus", s.b_plus);
            kv("b_minus", s.b_minus);
            kv("rho0", s.rho0);
            kv("t_end", fmt_num(s.t_end));
            kv("dt", fmt_num(s.dt));
            std::string list = "[";
            for (std::size_t i = 0; i < s.snapshot_times.size(); ++i) {
                if (i) list += ", ";
                list += fmt_num(s.snapshot_times[i]);
            }
            list += "]";
            kv("snapshot_times", list);
            if (s.kind == ScenarioKind::Kinetic) {
                if (s.steady_tol > 0.0) kv("steady_tol", fmt_num(s.steady_tol));
                if (s.adaptive) {
                    kv("adaptive", "true");
                    kv("adaptive_tol", fmt_num(s.adaptive_tol));
                }
            } else {
                kv("closure", s.closure == ClosureRule::MeanField ? "meanfield" : "kirkwood");
                kv("re_close", s.re_close ? "true" : "false");
            }
            break;
        }
    }
    return out;
}

std::uint64_t scenario_hash(const Scenario& s) {
    const std::string text = serialize_scenario(s);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

namespace {

Scenario kinetic_base(const std::string& name) {
    Scenario s;
    s.name = name;
    s.kind = ScenarioKind::Kinetic;
    s.length = 40.0;
    s.n_points = 512;
    s.t_end = 50.0;
    s.dt = 1e-3;
    s.snapshot_times = {0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0};
    s.steady_tol = 0.0;
    return s;
}

Scenario riccati_base(const std::string& name, double a, double b, double alpha,
                      double rho0) {
    Scenario s;
    s.name = name;
    s.kind = ScenarioKind::Riccati;
    s.coeff_a = a;
    s.coeff_b = b;
    s.coeff_alpha = alpha;
    s.rho0_value = rho0;
    s.t_end = 8.0;
    s.dt = 0.01;
    return s;
}

} // namespace

std::vector<std::string> preset_names() {
    return {"fig1a", "fig1b", "fig1c", "fig1d", "fig2L", "fig2R", "fig3L", "fig3R",
            "fig4L", "fig4R", "fig5",  "imdeath", "longcomp", "coxheavy"};
}

Scenario make_preset(const std::string& name) {
    if (name == "fig1a") return riccati_base(name, 3.0, 1.0, -1.0, 0.0);
    if (name == "fig1b") return riccati_base(name, 3.0, 1.0, -1.0, 3.0);
    if (name == "fig1c") return riccati_base(name, 1.0, 2.0, 1.0, 0.0);
    if (name == "fig1d") return riccati_base(name, 1.0, 2.0, 1.0, 3.0);

    if (name == "fig2L" || name == "fig2R") {
        Scenario s = kinetic_base(name);
        s.a_plus = "gaussian(1,1)";
        s.a_minus = "gaussian(1,1)";
        if (name == "fig2L") {
            s.b_plus = "pgaussian(10,1,5)";
            s.b_minus = "pgaussian(10,5,-5)";
        } else {
            s.b_plus = "pgaussian(10,5,5)";
            s.b_minus = "pgaussian(10,1,-5)";
        }
        s.rho0 = "const(1)";
        return s;
    }
    if (name == "fig3L" || name == "fig3R") {
        Scenario s = kinetic_base(name);
        if (name == "fig3L") {
            s.a_plus = "gaussian(2,0.5)";
            s.a_minus = "gaussian(2,5)";
        } else {
            s.a_plus = "gaussian(2,5)";
            s.a_minus = "gaussian(2,0.5)";
        }
        s.b_plus = "const(0.1)";
        s.b_minus = "const(0.1)";
        s.rho0 = "pgaussian(20,3,5)";
        return s;
    }
    if (name == "fig4L" || name == "fig4R") {
        Scenario s = kinetic_base(name);
        s.length = 60.0;
        s.t_end = 100.0;
        s.snapshot_times = {0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0};
        s.a_plus = "gaussian(2,4)";
        s.a_minus = name == "fig4L" ? "sgaussian(1,3,5)" : "sgaussian(1,3,10)";
        s.b_plus = "const(0.1)";
        s.b_minus = "const(0.1)";
        s.rho0 = "pgaussian(10,2,5)";
        return s;
    }
    if (name == "fig5") {
        Scenario s = kinetic_base(name);
        s.length = 60.0;
        s.a_plus = "gaussian(1,1)";
        s.a_minus = "sgaussian(1,2,10)";
        s.b_plus = "const(0.1)";
        s.b_minus = "const(0.1)";
        s.rho0 = "pgaussian(20,10,0)";
        return s;
    }
    if (name == "imdeath") {
        Scenario s;
        s.name = name;
        s.kind = ScenarioKind::Ibm;
        s.length = 40.0;
        s.a_plus = "zero";
        s.a_minus = "zero";
        s.b_plus = "const(0.5)";
        s.b_minus = "const(1)";
        s.rho0 = "const(0.5)";
        s.t_end = 37500.0;
        s.thinning = 3.0;
        s.seed = 1;
        s.replicas = 1;
        s.vessel_lo = 10.0;
        s.vessel_hi = 20.0;
        s.burn_in = 0.2;
        return s;
    }
    if (name == "longcomp") {
        Scenario s;
        s.name = name;
        s.kind = ScenarioKind::Ibm;
        s.length = 20.0;
        s.a_plus = "gaussian(0.2,1)";
        s.a_minus = "gaussian(0.4,1)";
        s.b_plus = "const(0.3)";
        s.b_minus = "const(0.1)";
        s.rho0 = "const(1)";
        s.t_end = 40.0;
        s.thinning = 10.0;
        s.seed = 1;
        s.replicas = 256;
        s.vessel_lo = 5.0;
        s.vessel_hi = 15.0;
        s.burn_in = 0.2;
        return s;
    }
    if (name == "coxheavy") {
        Scenario s;
        s.name = name;
        s.kind = ScenarioKind::Occupation;
        s.kappa = 1.0;
        s.volume = std::exp(1.0);
        s.n_max = 60;
        return s;
    }
    std::string available;
    for (const auto& n : preset_names()) available += (available.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown scenario preset '" + name +
                                "'; available: " + available);
}

RateKernels scenario_rate_kernels(const Scenario& s) {
    RateKernels rk;
    rk.a_plus = parse_kernel(s.a_plus, s.length);
    rk.a_minus = parse_kernel(s.a_minus, s.length);
    rk.b_plus = parse_kernel(s.b_plus, s.length);
    rk.b_minus = parse_kernel(s.b_minus, s.length);
    return rk;
}

KineticProblem scenario_kinetic_problem(const Scenario& s) {
    if (s.kind != ScenarioKind::Kinetic)
        throw std::invalid_argument("scenario '" + s.name + "' is not a kinetic scenario");
    KineticProblem p;
    p.grid = make_grid(s.length, s.n_points);
    p.rates = scenario_rate_kernels(s);
    p.rho0_spec = parse_kernel(s.rho0, s.length);
    p.t_end = s.t_end;
    p.dt = s.dt;
    p.adaptive = s.adaptive;
    p.adaptive_tol = s.adaptive_tol;
    p.steady_stop_tol = s.steady_tol;
    return p;
}

PairProblem scenario_pair_problem(const Scenario& s) {
    if (s.kind != ScenarioKind::Pair)
        throw std::invalid_argument("scenario '" + s.name + "' is not a pair scenario");
    PairProblem p;
    p.grid = make_grid(s.length, s.n_points);
    p.rates = scenario_rate_kernels(s);
    p.closure = s.closure;
    p.re_close = s.re_close;
    p.dt = s.dt;
    p.t_end = s.t_end;
    return p;
}

} // namespace popdyn
