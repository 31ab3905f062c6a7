#include "avalanche/lattice/pgm.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace avalanche::lattice {

void write_pgm(std::ostream& out, const Grid& grid) {
    const int m = grid.side();
    out << "P2\n" << m << ' ' << m << "\n2\n";
    for (int r = 0; r < m; ++r) {
        const auto row = grid.row(r);
        for (int c = 0; c < m; ++c) {
            if (c) out << ' ';
            out << static_cast<int>(row[c]);
        }
        out << '\n';
    }
}

std::string sidecar_line(const Grid& grid) {
    std::ostringstream s;
    s << "m " << grid.side() << " iteration " << grid.iteration() << " seed " << grid.seed();
    return s.str();
}

namespace {

// Next whitespace-delimited token, skipping '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    while (in >> tok) {
        if (tok[0] != '#') return tok;
        std::string rest;
        std::getline(in, rest);
    }
    throw std::runtime_error("pgm: unexpected end of input");
}

int parse_int(const std::string& tok, const char* what) {
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(tok, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != tok.size()) throw std::runtime_error(std::string("pgm: bad ") + what + " '" + tok + "'");
    return v;
}

}  // namespace

Grid read_pgm(std::istream& in, const std::string& sidecar) {
    if (next_token(in) != "P2") throw std::runtime_error("pgm: missing P2 magic");
    const int w = parse_int(next_token(in), "width");
    const int h = parse_int(next_token(in), "height");
    const int maxval = parse_int(next_token(in), "maxval");
    if (w != h || w <= 0) throw std::runtime_error("pgm: grid must be square and non-empty");
    if (maxval != 2) throw std::runtime_error("pgm: maxval must be 2");

    std::istringstream meta(sidecar);
    std::string k1, k2, k3;
    int m = 0;
    std::uint64_t iteration = 0, seed = 0;
    if (!(meta >> k1 >> m >> k2 >> iteration >> k3 >> seed) || k1 != "m" ||
        k2 != "iteration" || k3 != "seed") {
        throw std::runtime_error("pgm: malformed sidecar '" + sidecar + "'");
    }
    if (m != w) throw std::runtime_error("pgm: sidecar side disagrees with header");

    Grid g(m, seed);
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            const int v = parse_int(next_token(in), "cell value");
            if (v < 0 || v > 2) throw std::runtime_error("pgm: cell value out of range");
            g.set(r, c, static_cast<CellState>(v));
        }
    }
    g.set_iteration(iteration);
    return g;
}

void save_snapshot(const std::filesystem::path& path, const Grid& grid) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_pgm(out, grid);
    std::ofstream meta(path.string() + ".meta", std::ios::binary);
    meta << sidecar_line(grid) << '\n';
    if (!out || !meta) throw std::runtime_error("write failed for " + path.string());
}

Grid load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ifstream meta(path.string() + ".meta", std::ios::binary);
    if (!in || !meta) throw std::runtime_error("cannot read snapshot " + path.string());
    std::string line;
    std::getline(meta, line);
    return read_pgm(in, line);
}

}  // namespace avalanche::lattice
