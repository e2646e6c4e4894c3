#include "driftlab/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace driftlab::csv {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    return in;
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("bad numeric cell '" + s + "' in " + path.string());
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_trajectory(const std::filesystem::path& path, const sde::Trajectory& traj) {
    auto out = open_out(path);
    const int d = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().size());
    out << "t";
    for (int i = 1; i <= d; ++i) out << ",x" << i;
    out << "\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        out << format_double(traj.times[k]);
        for (int i = 0; i < d; ++i) out << "," << format_double(traj.states[k](i));
        out << "\n";
    }
}

void write_ensemble(const std::filesystem::path& path, const sde::ParticleEnsemble& ensemble) {
    auto out = open_out(path);
    const int d = ensemble.dim();
    out << "id";
    for (int i = 1; i <= d; ++i) out << ",x" << i;
    out << "\n";
    for (int j = 0; j < ensemble.size(); ++j) {
        out << j;
        for (int i = 0; i < d; ++i) out << "," << format_double(ensemble.particles(i, j));
        out << "\n";
    }
}

void write_series(const std::filesystem::path& path, const harness::Series& series) {
    auto out = open_out(path);
    for (std::size_t i = 0; i < series.columns.size(); ++i)
        out << (i ? "," : "") << series.columns[i];
    out << "\n";
    for (const auto& row : series.rows) {
        if (row.size() != series.columns.size())
            throw std::invalid_argument("series row width does not match its header");
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << "\n";
    }
}

harness::Series read_series(const std::filesystem::path& path) {
    auto in = open_in(path);
    harness::Series s;
    s.name = path.stem().string();
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty series file: " + path.string());
    s.columns = split_commas(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_commas(line);
        if (cells.size() != s.columns.size())
            throw std::runtime_error("ragged series row in " + path.string());
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(parse_double(c, path));
        s.rows.push_back(std::move(row));
    }
    return s;
}

void write_grid(const std::filesystem::path& path, const measures::GridDensity& density) {
    auto out = open_out(path);
    const auto& g = density.grid;
    out << "x_min,x_max,y_min,y_max,nx,ny\n";
    out << format_double(g.x_min) << "," << format_double(g.x_max) << ","
        << format_double(g.y_min) << "," << format_double(g.y_max) << "," << g.nx << "," << g.ny
        << "\n";
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) out << (j ? "," : "") << format_double(density.values(i, j));
        out << "\n";
    }
}

measures::GridDensity read_grid(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || split_commas(line).size() != 6)
        throw std::runtime_error("missing grid header in " + path.string());
    if (!std::getline(in, line)) throw std::runtime_error("missing grid bounds in " + path.string());
    const auto cells = split_commas(line);
    if (cells.size() != 6) throw std::runtime_error("bad grid bounds row in " + path.string());
    const measures::GridSpec spec(parse_double(cells[0], path), parse_double(cells[1], path),
                                  parse_double(cells[2], path), parse_double(cells[3], path),
                                  static_cast<int>(parse_double(cells[4], path)),
                                  static_cast<int>(parse_double(cells[5], path)));
    measures::GridDensity density(spec);
    for (int i = 0; i < spec.nx; ++i) {
        if (!std::getline(in, line))
            throw std::runtime_error("truncated grid values in " + path.string());
        const auto row = split_commas(line);
        if (static_cast<int>(row.size()) != spec.ny)
            throw std::runtime_error("ragged grid row in " + path.string());
        for (int j = 0; j < spec.ny; ++j) density.values(i, j) = parse_double(row[j], path);
    }
    return density;
}

void write_meta(const std::filesystem::path& path,
                const std::vector<std::pair<std::string, std::string>>& entries) {
    auto out = open_out(path);
    for (const auto& [k, v] : entries) out << k << " = " << v << "\n";
}

}  // namespace driftlab::csv
