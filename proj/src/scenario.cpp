#include "feller/scenario.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace feller {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw std::invalid_argument("scenario: bad number for '" + key + "': " + v);
    }
}

long to_long(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw std::invalid_argument("scenario: bad integer for '" + key + "': " + v);
    }
}

GrowthRate parse_gamma(const std::string& v) {
    if (v.find(':') == std::string::npos) return GrowthRate::constant(to_double("gamma", v));
    std::vector<double> ts, vs;
    for (const auto& knot : split(v, ',')) {
        const auto parts = split(knot, ':');
        if (parts.size() != 2) throw std::invalid_argument("scenario: bad gamma knot: " + knot);
        ts.push_back(to_double("gamma", parts[0]));
        vs.push_back(to_double("gamma", parts[1]));
    }
    return GrowthRate(ts, vs);
}

InitialCondition parse_x0(const std::string& v) {
    if (v.rfind("gamma:", 0) == 0) {
        const auto parts = split(v.substr(6), ',');
        if (parts.size() != 2) throw std::invalid_argument("scenario: x0 gamma needs shape,scale");
        return InitialCondition::gamma_iid(to_double("x0", parts[0]), to_double("x0", parts[1]));
    }
    if (v.rfind("vector:", 0) == 0) {
        std::vector<double> vals;
        for (const auto& p : split(v.substr(7), ',')) vals.push_back(to_double("x0", p));
        return InitialCondition::vector(std::move(vals));
    }
    return InitialCondition::point(to_double("x0", v));
}

SweepAxis parse_axis(const std::string& param, const std::string& grid) {
    static const std::vector<std::string> known{"q", "eps", "r", "gamma", "N"};
    bool ok = false;
    for (const auto& k : known) ok = ok || k == param;
    if (!ok) throw std::invalid_argument("scenario: unknown sweep parameter '" + param + "'");
    const auto parts = split(grid, ':');
    if (parts.size() != 3) throw std::invalid_argument("scenario: sweep grid must be lo:hi:count");
    SweepAxis ax;
    ax.param = param;
    ax.lo = to_double("grid", parts[0]);
    ax.hi = to_double("grid", parts[1]);
    ax.count = static_cast<int>(to_long("grid", parts[2]));
    if (ax.count < 1 || ax.hi < ax.lo) throw std::invalid_argument("scenario: bad sweep grid");
    return ax;
}

}  // namespace

Scenario Scenario::parse(std::istream& is) {
    Scenario sc;
    bool have_horizon = false, have_discount = false;
    std::string sweep_param, sweep_grid, sweep_param2, sweep_grid2;
    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("scenario: malformed section header at line " +
                                            std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            if (section != "model" && section != "simulation" && section != "output" &&
                section != "sweep")
                throw std::invalid_argument("scenario: unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("scenario: expected key = value at line " +
                                        std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (section == "model") {
            if (key == "a") sc.model.a = to_double(key, val);
            else if (key == "q") sc.model.q = to_double(key, val);
            else if (key == "eps") sc.model.eps = to_double(key, val);
            else if (key == "c") sc.model.c = to_double(key, val);
            else if (key == "banks") sc.model.n_banks = static_cast<int>(to_long(key, val));
            else if (key == "horizon") { sc.model.horizon = to_double(key, val); have_horizon = true; }
            else if (key == "discount") { sc.model.discount = to_double(key, val); have_discount = true; }
            else if (key == "gamma") sc.model.gamma = parse_gamma(val);
            else throw std::invalid_argument("scenario: unknown key '" + key + "' in [model]");
        } else if (section == "simulation") {
            if (key == "dt") sc.sim.dt = to_double(key, val);
            else if (key == "paths") sc.sim.n_paths = static_cast<int>(to_long(key, val));
            else if (key == "seed") sc.sim.seed = static_cast<std::uint64_t>(to_long(key, val));
            else if (key == "threads") sc.sim.n_threads = static_cast<int>(to_long(key, val));
            else if (key == "scheme") {
                if (val == "full-truncation-euler") sc.sim.scheme = Scheme::FullTruncationEuler;
                else if (val == "exact-besq") sc.sim.scheme = Scheme::ExactBesq;
                else throw std::invalid_argument("scenario: unknown scheme '" + val + "'");
            } else if (key == "record") {
                if (val == "full-paths") sc.sim.record = RecordMode::FullPaths;
                else if (val == "terminal-plus-events")
                    sc.sim.record = RecordMode::TerminalPlusEvents;
                else throw std::invalid_argument("scenario: unknown record mode '" + val + "'");
            } else if (key == "system") {
                if (val == "uncontrolled") sc.system = SimSystem::Uncontrolled;
                else if (val == "equilibrium") sc.system = SimSystem::Equilibrium;
                else if (val == "total-reserve") sc.system = SimSystem::TotalReserve;
                else throw std::invalid_argument("scenario: unknown system '" + val + "'");
            } else if (key == "x0") sc.init = parse_x0(val);
            else if (key == "y0") sc.y0 = to_double(key, val);
            else throw std::invalid_argument("scenario: unknown key '" + key + "' in [simulation]");
        } else if (section == "output") {
            if (key == "formats") {
                sc.csv_output = false;
                sc.binary_output = false;
                for (const auto& f : split(val, ',')) {
                    if (f == "csv") sc.csv_output = true;
                    else if (f == "binary") sc.binary_output = true;
                    else throw std::invalid_argument("scenario: unknown output format '" + f + "'");
                }
            } else if (key == "stride") sc.stride = static_cast<int>(to_long(key, val));
            else throw std::invalid_argument("scenario: unknown key '" + key + "' in [output]");
        } else if (section == "sweep") {
            if (key == "param") sweep_param = val;
            else if (key == "grid") sweep_grid = val;
            else if (key == "param2") sweep_param2 = val;
            else if (key == "grid2") sweep_grid2 = val;
            else throw std::invalid_argument("scenario: unknown key '" + key + "' in [sweep]");
        } else {
            throw std::invalid_argument("scenario: key '" + key + "' outside any section");
        }
    }
    if (have_horizon && have_discount)
        throw std::invalid_argument("scenario: specify exactly one of horizon/discount");
    sc.model.mode = have_discount ? HorizonMode::Discounted : HorizonMode::Finite;
    if (!sweep_param.empty() != !sweep_grid.empty())
        throw std::invalid_argument("scenario: sweep needs both param and grid");
    if (!sweep_param.empty()) sc.sweep = parse_axis(sweep_param, sweep_grid);
    if (!sweep_param2.empty() != !sweep_grid2.empty())
        throw std::invalid_argument("scenario: sweep needs both param2 and grid2");
    if (!sweep_param2.empty()) {
        if (!sc.sweep) throw std::invalid_argument("scenario: param2 without a primary sweep axis");
        sc.sweep2 = parse_axis(sweep_param2, sweep_grid2);
    }
    sc.model.validate();
    if (sc.stride < 1) throw std::invalid_argument("scenario: stride must be >= 1");
    if (!(sc.sim.dt > 0.0) || sc.sim.n_paths < 1)
        throw std::invalid_argument("scenario: dt must be > 0 and paths >= 1");
    return sc;
}

Scenario Scenario::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("scenario: cannot open " + path);
    return parse(is);
}

std::string Scenario::to_manifest() const {
    std::ostringstream os;
    os.precision(17);
    os << "[model]\n";
    os << "a = " << model.a << "\n";
    os << "q = " << model.q << "\n";
    os << "eps = " << model.eps << "\n";
    os << "c = " << model.c << "\n";
    os << "banks = " << model.n_banks << "\n";
    if (model.mode == HorizonMode::Finite) os << "horizon = " << model.horizon << "\n";
    else os << "discount = " << model.discount << "\n";
    os << "gamma = ";
    const auto& g = model.gamma;
    if (g.is_constant()) {
        os << g.values().front() << "\n";
    } else {
        for (std::size_t i = 0; i < g.times().size(); ++i)
            os << (i ? ", " : "") << g.times()[i] << ":" << g.values()[i];
        os << "\n";
    }
    os << "\n[simulation]\n";
    os << "dt = " << sim.dt << "\n";
    os << "paths = " << sim.n_paths << "\n";
    os << "seed = " << sim.seed << "\n";
    os << "threads = " << sim.n_threads << "\n";
    os << "scheme = "
       << (sim.scheme == Scheme::FullTruncationEuler ? "full-truncation-euler" : "exact-besq")
       << "\n";
    os << "record = "
       << (sim.record == RecordMode::FullPaths ? "full-paths" : "terminal-plus-events") << "\n";
    os << "system = "
       << (system == SimSystem::Uncontrolled
               ? "uncontrolled"
               : system == SimSystem::Equilibrium ? "equilibrium" : "total-reserve")
       << "\n";
    switch (init.kind) {
        case InitialCondition::Kind::PointMass: os << "x0 = " << init.value << "\n"; break;
        case InitialCondition::Kind::GammaIid:
            os << "x0 = gamma:" << init.shape << "," << init.scale << "\n";
            break;
        case InitialCondition::Kind::Vector: {
            os << "x0 = vector:";
            for (std::size_t i = 0; i < init.values.size(); ++i)
                os << (i ? "," : "") << init.values[i];
            os << "\n";
            break;
        }
    }
    os << "y0 = " << y0 << "\n";
    os << "\n[output]\n";
    os << "formats = ";
    if (csv_output) os << "csv";
    if (binary_output) os << (csv_output ? ", binary" : "binary");
    os << "\n";
    os << "stride = " << stride << "\n";
    if (sweep) {
        os << "\n[sweep]\n";
        os << "param = " << sweep->param << "\n";
        os << "grid = " << sweep->lo << ":" << sweep->hi << ":" << sweep->count << "\n";
        if (sweep2) {
            os << "param2 = " << sweep2->param << "\n";
            os << "grid2 = " << sweep2->lo << ":" << sweep2->hi << ":" << sweep2->count << "\n";
        }
    }
    return os.str();
}

}  // namespace feller
