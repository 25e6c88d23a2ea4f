#include "curlspec/result_io.hpp"

#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>

#include "curlspec/complex.hpp"

namespace curlspec {

using nlohmann::ordered_json;

ordered_json eigen_result_to_json(const EigenResult& result) {
    ordered_json j;
    j["eigenvalues"] = std::vector<double>(result.eigenvalues.data(),
                                           result.eigenvalues.data() + result.eigenvalues.size());
    j["residual_norms"] = std::vector<double>(
        result.residual_norms.data(), result.residual_norms.data() + result.residual_norms.size());
    j["csym_residuals"] = std::vector<double>(
        result.csym_residuals.data(), result.csym_residuals.data() + result.csym_residuals.size());
    ordered_json clusters = ordered_json::array();
    for (auto [a, b] : result.clusters) clusters.push_back({{"begin", a}, {"end", b}});
    j["clusters"] = clusters;
    ordered_json violations = ordered_json::array();
    for (int i = 0; i < result.constraint_violations.cols(); ++i) {
        violations.push_back({{"divergence", result.constraint_violations(0, i)},
                              {"trace_closure", result.constraint_violations(1, i)},
                              {"period", result.constraint_violations(2, i)},
                              {"flux", result.constraint_violations(3, i)}});
    }
    j["constraint_violations"] = violations;
    j["harmonic_dimension"] = result.harmonic_basis.cols();
    j["harmonic_eigenvalues"] =
        std::vector<double>(result.harmonic_eigenvalues.data(),
                            result.harmonic_eigenvalues.data() + result.harmonic_eigenvalues.size());
    j["kernel_threshold"] = result.kernel_threshold;
    j["gap_tol"] = result.gap_tol_used;
    j["shift"] = result.shift;
    j["iterations"] = result.iterations;
    j["vectors_real"] = result.vectors_real;
    // index conventions with and without the kernel
    j["n_eigenvalues_excluding_kernel"] = result.eigenvalues.size();
    j["n_eigenvalues_including_kernel"] =
        result.eigenvalues.size() + result.harmonic_basis.cols();
    return j;
}

void write_vtk_field(std::ostream& os, const TetMesh& mesh, const Eigen::VectorXcd& cochain,
                     const std::string& field_name) {
    Eigen::VectorXd v = cochain.real();
    // point-averaged interpolant over incident tets
    std::vector<Vec3> pointval(mesh.n_vertices(), Vec3::Zero());
    std::vector<int> count(mesh.n_vertices(), 0);
    for (int t = 0; t < mesh.n_tets(); ++t) {
        const auto& T = mesh.tets[t];
        for (int c = 0; c < 4; ++c) {
            std::array<double, 4> bary{0, 0, 0, 0};
            bary[c] = 1.0;
            pointval[T[c]] += whitney1_eval(mesh, t, v, bary);
            ++count[T[c]];
        }
    }
    for (int p = 0; p < mesh.n_vertices(); ++p)
        if (count[p] > 0) pointval[p] /= count[p];

    os << "# vtk DataFile Version 3.0\n";
    os << "curlspec eigenfield\n";
    os << "ASCII\n";
    os << "DATASET UNSTRUCTURED_GRID\n";
    os << std::setprecision(12);
    os << "POINTS " << mesh.n_vertices() << " double\n";
    for (const auto& p : mesh.vertices) os << p.x() << " " << p.y() << " " << p.z() << "\n";
    os << "CELLS " << mesh.n_tets() << " " << 5 * mesh.n_tets() << "\n";
    for (const auto& T : mesh.tets)
        os << "4 " << T[0] << " " << T[1] << " " << T[2] << " " << T[3] << "\n";
    os << "CELL_TYPES " << mesh.n_tets() << "\n";
    for (int t = 0; t < mesh.n_tets(); ++t) os << "10\n";
    os << "POINT_DATA " << mesh.n_vertices() << "\n";
    os << "VECTORS " << field_name << " double\n";
    for (const auto& p : pointval) os << p.x() << " " << p.y() << " " << p.z() << "\n";
}

void write_vtk_field_file(const std::string& path, const TetMesh& mesh,
                          const Eigen::VectorXcd& cochain, const std::string& field_name) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open for writing: " + path);
    write_vtk_field(os, mesh, cochain, field_name);
}

}  // namespace curlspec
