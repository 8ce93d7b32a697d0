#include "feller/io.hpp"

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace feller {

namespace {

constexpr char kMagic[10] = {'F', 'E', 'L', 'L', 'E', 'R', 'S', 'I', 'M', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw std::runtime_error("ensemble cache: truncated stream");
    return v;
}

void put_doubles(std::ostream& os, const std::vector<double>& v) {
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void get_doubles(std::istream& is, std::vector<double>& v, std::size_t n) {
    v.resize(n);
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw std::runtime_error("ensemble cache: truncated stream");
}

}  // namespace

void write_ensemble_csv(const PathEnsemble& ensemble, std::ostream& os, int stride) {
    if (stride < 1) stride = 1;
    os << "path,t,bank,value\n";
    if (ensemble.record == RecordMode::FullPaths) {
        const std::size_t n = ensemble.grid.size();
        for (int p = 0; p < ensemble.n_paths; ++p) {
            for (std::size_t k = 0; k < n; k += stride) {
                for (int b = 0; b < ensemble.n_banks; ++b)
                    os << p << ',' << ensemble.grid[k] << ',' << b << ','
                       << ensemble.value(p, static_cast<int>(k), b) << '\n';
            }
            if ((n - 1) % stride != 0)
                for (int b = 0; b < ensemble.n_banks; ++b)
                    os << p << ',' << ensemble.grid[n - 1] << ',' << b << ','
                       << ensemble.value(p, static_cast<int>(n - 1), b) << '\n';
        }
    } else {
        for (int p = 0; p < ensemble.n_paths; ++p)
            for (int b = 0; b < ensemble.n_banks; ++b)
                os << p << ',' << ensemble.grid.back() << ',' << b << ','
                   << ensemble.terminal_value(p, b) << '\n';
    }
}

void write_coefficients_csv(const CoefficientPath& path, std::ostream& os, int stride) {
    if (stride < 1) stride = 1;
    os << "t,eta,L,phi,mu,psi\n";
    const std::size_t n = path.size();
    for (std::size_t k = 0; k < n; k += stride) {
        os << path.grid[k] << ',' << path.eta[k] << ',' << path.L[k] << ',' << path.phi[k] << ','
           << path.mu[k] << ',' << path.psi[k] << '\n';
    }
    if ((n - 1) % stride != 0)
        os << path.grid[n - 1] << ',' << path.eta[n - 1] << ',' << path.L[n - 1] << ','
           << path.phi[n - 1] << ',' << path.mu[n - 1] << ',' << path.psi[n - 1] << '\n';
}

void write_ensemble_binary(const PathEnsemble& ensemble, std::ostream& os) {
    os.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(os, kVersion);
    put<std::uint32_t>(os, ensemble.record == RecordMode::FullPaths ? 0 : 1);
    put<std::uint64_t>(os, static_cast<std::uint64_t>(ensemble.n_paths));
    put<std::uint64_t>(os, static_cast<std::uint64_t>(ensemble.n_banks));
    put<std::uint64_t>(os, static_cast<std::uint64_t>(ensemble.grid.size()));
    put<std::uint64_t>(os, ensemble.config.seed);
    put<double>(os, ensemble.config.dt);
    put<std::uint64_t>(os, ensemble.truncation_events);
    put<std::uint64_t>(os, ensemble.total_steps);
    put_doubles(os, ensemble.grid);
    if (ensemble.record == RecordMode::FullPaths) put_doubles(os, ensemble.values);
    put_doubles(os, ensemble.terminal);
    put_doubles(os, ensemble.first_zero);
}

PathEnsemble read_ensemble_binary(std::istream& is) {
    char magic[10];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("ensemble cache: bad magic");
    const auto version = get<std::uint32_t>(is);
    if (version != kVersion) throw std::runtime_error("ensemble cache: unsupported version");
    PathEnsemble ens;
    ens.record = get<std::uint32_t>(is) == 0 ? RecordMode::FullPaths
                                             : RecordMode::TerminalPlusEvents;
    ens.n_paths = static_cast<int>(get<std::uint64_t>(is));
    ens.n_banks = static_cast<int>(get<std::uint64_t>(is));
    const auto n_times = get<std::uint64_t>(is);
    ens.config.seed = get<std::uint64_t>(is);
    ens.config.dt = get<double>(is);
    ens.config.record = ens.record;
    ens.config.n_paths = ens.n_paths;
    ens.truncation_events = get<std::uint64_t>(is);
    ens.total_steps = get<std::uint64_t>(is);
    get_doubles(is, ens.grid, n_times);
    const std::size_t pb = static_cast<std::size_t>(ens.n_paths) * ens.n_banks;
    if (ens.record == RecordMode::FullPaths)
        get_doubles(is, ens.values, pb * n_times);
    get_doubles(is, ens.terminal, pb);
    get_doubles(is, ens.first_zero, pb);
    return ens;
}

}  // namespace feller
