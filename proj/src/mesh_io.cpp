#include "curlspec/mesh_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace curlspec {

namespace {

// Tokenizer that skips '#' comments.
class TokenStream {
public:
    explicit TokenStream(std::istream& is) : is_(is) {}

    bool next(std::string& tok) {
        while (true) {
            if (!(is_ >> tok)) return false;
            if (tok[0] == '#') {
                std::string rest;
                std::getline(is_, rest);
                continue;
            }
            return true;
        }
    }

    std::string expect(const char* what) {
        std::string tok;
        if (!next(tok)) throw Error(std::string("tmesh: unexpected end of input, wanted ") + what);
        return tok;
    }

    long expect_int(const char* what) {
        std::string tok = expect(what);
        size_t pos = 0;
        long v = std::stol(tok, &pos);
        if (pos != tok.size()) throw Error(std::string("tmesh: bad integer for ") + what);
        return v;
    }

    double expect_double(const char* what) {
        std::string tok = expect(what);
        size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw Error(std::string("tmesh: bad number for ") + what);
        return v;
    }

private:
    std::istream& is_;
};

}  // namespace

void write_tmesh(std::ostream& os, const TetMesh& mesh) {
    os << "tmesh 1\n";
    if (!mesh.domain_name.empty()) os << "# domain: " << mesh.domain_name << "\n";
    os << mesh.n_vertices() << " " << mesh.n_edges() << " " << mesh.n_faces() << " "
       << mesh.n_tets() << "\n";
    os << std::setprecision(17);
    for (const auto& v : mesh.vertices)
        os << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
    for (const auto& T : mesh.tets)
        os << "t " << T[0] << " " << T[1] << " " << T[2] << " " << T[3] << "\n";
    for (const auto& [name, tris] : mesh.surface_tags) {
        os << "surface " << name << " " << tris.size() << "\n";
        for (const auto& tri : tris) os << tri[0] << " " << tri[1] << " " << tri[2] << "\n";
    }
    for (const auto& [name, pairs] : mesh.curve_tags) {
        os << "curve " << name << " " << pairs.size() << "\n";
        for (const auto& pr : pairs) os << pr[0] << " " << pr[1] << "\n";
    }
}

void write_tmesh_file(const std::string& path, const TetMesh& mesh) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open for writing: " + path);
    write_tmesh(os, mesh);
}

TetMesh read_tmesh(std::istream& is) {
    // Domain-name comments are recovered before tokenizing.
    std::ostringstream buffer;
    buffer << is.rdbuf();
    std::string content = buffer.str();
    TetMesh mesh;
    {
        auto pos = content.find("# domain:");
        if (pos != std::string::npos) {
            auto end = content.find('\n', pos);
            std::string name = content.substr(pos + 9, end - pos - 9);
            size_t a = name.find_first_not_of(" \t");
            size_t b = name.find_last_not_of(" \t\r");
            if (a != std::string::npos) mesh.domain_name = name.substr(a, b - a + 1);
        }
    }
    std::istringstream ss(content);
    TokenStream ts(ss);
    if (ts.expect("header") != "tmesh") throw Error("tmesh: missing 'tmesh' header");
    if (ts.expect_int("version") != 1) throw Error("tmesh: unsupported version");
    long nv = ts.expect_int("vertex count");
    ts.expect_int("edge count");
    ts.expect_int("face count");
    long nt = ts.expect_int("tet count");
    if (nv < 0 || nt < 0) throw Error("tmesh: negative counts");

    mesh.vertices.reserve(nv);
    mesh.tets.reserve(nt);
    std::string tok;
    long seen_v = 0, seen_t = 0;
    while (ts.next(tok)) {
        if (tok == "v") {
            double x = ts.expect_double("x"), y = ts.expect_double("y"), z = ts.expect_double("z");
            mesh.vertices.emplace_back(x, y, z);
            ++seen_v;
        } else if (tok == "t") {
            std::array<int, 4> T;
            for (int k = 0; k < 4; ++k) T[k] = static_cast<int>(ts.expect_int("tet vertex"));
            mesh.tets.push_back(T);
            ++seen_t;
        } else if (tok == "surface") {
            std::string name = ts.expect("surface name");
            long count = ts.expect_int("surface count");
            std::vector<std::array<int, 3>> tris(count);
            for (auto& tri : tris)
                for (int k = 0; k < 3; ++k) tri[k] = static_cast<int>(ts.expect_int("face vertex"));
            mesh.surface_tags[name] = std::move(tris);
        } else if (tok == "curve") {
            std::string name = ts.expect("curve name");
            long count = ts.expect_int("curve count");
            std::vector<std::array<int, 2>> pairs(count);
            for (auto& pr : pairs)
                for (int k = 0; k < 2; ++k) pr[k] = static_cast<int>(ts.expect_int("edge vertex"));
            mesh.curve_tags[name] = std::move(pairs);
        } else {
            throw Error("tmesh: unexpected token '" + tok + "'");
        }
    }
    if (seen_v != nv) throw Error("tmesh: vertex count mismatch");
    if (seen_t != nt) throw Error("tmesh: tet count mismatch");
    mesh.finalize();
    return mesh;
}

TetMesh read_tmesh_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open for reading: " + path);
    return read_tmesh(is);
}

TetMesh read_msh22(std::istream& is) {
    std::string line;
    TetMesh mesh;
    std::map<long, int> node_map;  // gmsh 1-based ids -> compact ids
    bool got_nodes = false, got_elements = false;
    while (std::getline(is, line)) {
        if (line.rfind("$MeshFormat", 0) == 0) {
            std::getline(is, line);
            std::istringstream ls(line);
            double version;
            ls >> version;
            if (!(version >= 2.0 && version < 3.0)) throw Error("msh: only MSH 2.2 ASCII supported");
            std::getline(is, line);  // $EndMeshFormat
        } else if (line.rfind("$Nodes", 0) == 0) {
            std::getline(is, line);
            long n = std::stol(line);
            for (long i = 0; i < n; ++i) {
                std::getline(is, line);
                std::istringstream ls(line);
                long id;
                double x, y, z;
                ls >> id >> x >> y >> z;
                node_map[id] = static_cast<int>(mesh.vertices.size());
                mesh.vertices.emplace_back(x, y, z);
            }
            got_nodes = true;
        } else if (line.rfind("$Elements", 0) == 0) {
            std::getline(is, line);
            long n = std::stol(line);
            for (long i = 0; i < n; ++i) {
                std::getline(is, line);
                std::istringstream ls(line);
                long id, type, ntags;
                ls >> id >> type >> ntags;
                std::vector<long> tags(ntags);
                for (auto& t : tags) ls >> t;
                if (type == 4) {
                    std::array<int, 4> T;
                    for (int k = 0; k < 4; ++k) {
                        long nid;
                        ls >> nid;
                        T[k] = node_map.at(nid);
                    }
                    mesh.tets.push_back(T);
                } else if (type == 2) {
                    std::array<int, 3> tri;
                    for (int k = 0; k < 3; ++k) {
                        long nid;
                        ls >> nid;
                        tri[k] = node_map.at(nid);
                    }
                    long phys = ntags > 0 ? tags[0] : 0;
                    mesh.surface_tags["physical_" + std::to_string(phys)].push_back(tri);
                }
                // other element types ignored
            }
            got_elements = true;
        }
    }
    if (!got_nodes || !got_elements) throw Error("msh: missing $Nodes or $Elements section");
    // Fix tet orientation (gmsh does not guarantee positive volumes).
    for (auto& T : mesh.tets) {
        double vol = tet_volume(mesh.vertices[T[0]], mesh.vertices[T[1]], mesh.vertices[T[2]],
                                mesh.vertices[T[3]]);
        if (vol < 0) std::swap(T[2], T[3]);
    }
    mesh.finalize();
    return mesh;
}

TetMesh read_msh22_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open for reading: " + path);
    return read_msh22(is);
}

}  // namespace curlspec
