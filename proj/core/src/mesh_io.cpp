#include "softopt/mesh_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "softopt/errors.hpp"
#include "softopt/text.hpp"

namespace softopt::fem {

namespace {

class LineReader {
public:
    explicit LineReader(std::istream& is) : is_(is) {}

    std::vector<std::string> next() {
        std::string line;
        while (std::getline(is_, line)) {
            ++line_no_;
            auto fields = text::split_ws(line);
            if (fields.empty() || fields.front().starts_with('#')) {
                continue;
            }
            return fields;
        }
        fail("unexpected end of file");
    }

    std::size_t count(const std::string& keyword) {
        const auto f = next();
        if (f.size() != 2 || f[0] != keyword) {
            fail("expected '" + keyword + " <count>'");
        }
        return index(f[1]);
    }

    std::size_t index(const std::string& s) {
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(s, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != s.size() || s.starts_with('-')) {
            fail("invalid index '" + s + "'");
        }
        return static_cast<std::size_t>(v);
    }

    double real(const std::string& s) {
        try {
            return text::parse_double(s, "coordinate");
        } catch (const ContractError&) {
            fail("invalid number '" + s + "'");
        }
    }

    template <std::size_t K>
    std::array<std::size_t, K> indices() {
        const auto f = next();
        if (f.size() != K) {
            fail("expected " + std::to_string(K) + " indices");
        }
        std::array<std::size_t, K> out{};
        for (std::size_t i = 0; i < K; ++i) {
            out[i] = index(f[i]);
        }
        return out;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ContractError("mesh line " + std::to_string(line_no_) + ": " + msg);
    }

private:
    std::istream& is_;
    std::size_t line_no_ = 0;
};

} // namespace

void write_mesh(std::ostream& os, const TetMesh& mesh) {
    os << "softopt-tetmesh 1\n";
    os << "nodes " << mesh.nodes.size() << '\n';
    for (const auto& p : mesh.nodes) {
        os << text::format_double(p.x()) << ' ' << text::format_double(p.y()) << ' ' << text::format_double(p.z())
           << '\n';
    }
    os << "tets " << mesh.tets.size() << '\n';
    for (const auto& t : mesh.tets) {
        os << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
    }
    os << "cavities " << mesh.cavity_surfaces.size() << '\n';
    for (std::size_t c = 0; c < mesh.cavity_surfaces.size(); ++c) {
        os << "cavity " << c << ' ' << mesh.cavity_surfaces[c].size() << '\n';
        for (const auto& t : mesh.cavity_surfaces[c]) {
            os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
        }
    }
    os << "fixed " << mesh.fixed_nodes.size() << '\n';
    for (auto v : mesh.fixed_nodes) {
        os << v << '\n';
    }
    os << "cable " << mesh.cable.size() << '\n';
    for (const auto& group : mesh.cable) {
        os << group.size();
        for (auto v : group) {
            os << ' ' << v;
        }
        os << '\n';
    }
    os << "tip " << mesh.tip_node << '\n';
}

TetMesh read_mesh(std::istream& is) {
    LineReader in(is);
    const auto magic = in.next();
    if (magic.size() != 2 || magic[0] != "softopt-tetmesh" || magic[1] != "1") {
        in.fail("missing 'softopt-tetmesh 1' header");
    }
    TetMesh mesh;
    mesh.nodes.resize(in.count("nodes"));
    for (auto& p : mesh.nodes) {
        const auto f = in.next();
        if (f.size() != 3) {
            in.fail("expected 3 coordinates");
        }
        p = Vec3(in.real(f[0]), in.real(f[1]), in.real(f[2]));
    }
    mesh.tets.resize(in.count("tets"));
    for (auto& t : mesh.tets) {
        t = in.indices<4>();
    }
    mesh.cavity_surfaces.resize(in.count("cavities"));
    for (std::size_t c = 0; c < mesh.cavity_surfaces.size(); ++c) {
        const auto f = in.next();
        if (f.size() != 3 || f[0] != "cavity" || in.index(f[1]) != c) {
            in.fail("expected 'cavity " + std::to_string(c) + " <count>'");
        }
        mesh.cavity_surfaces[c].resize(in.index(f[2]));
        for (auto& t : mesh.cavity_surfaces[c]) {
            t = in.indices<3>();
        }
    }
    mesh.fixed_nodes.resize(in.count("fixed"));
    for (auto& v : mesh.fixed_nodes) {
        v = in.indices<1>()[0];
    }
    mesh.cable.resize(in.count("cable"));
    for (auto& group : mesh.cable) {
        const auto f = in.next();
        if (f.empty() || in.index(f[0]) + 1 != f.size()) {
            in.fail("expected '<count> <node>...' for a cable point");
        }
        for (std::size_t k = 1; k < f.size(); ++k) {
            group.push_back(in.index(f[k]));
        }
    }
    mesh.tip_node = in.count("tip");
    mesh.validate();
    return mesh;
}

void save_mesh(const std::string& path, const TetMesh& mesh) {
    std::ofstream os(path);
    if (!os) {
        throw ContractError("cannot write mesh file '" + path + "'");
    }
    write_mesh(os, mesh);
}

TetMesh load_mesh(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        throw ContractError("cannot open mesh file '" + path + "'");
    }
    return read_mesh(is);
}

} // namespace softopt::fem
