#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "curlspec/spectrum.hpp"

namespace curlspec {

/// EigenResult as JSON: eigenvalues, residuals, constraint violations,
/// cluster structure, harmonic data and both index conventions (with and
/// without the kernel).
nlohmann::ordered_json eigen_result_to_json(const EigenResult& result);

/// Legacy ASCII VTK unstructured grid with the point-averaged vector field
/// of an edge cochain (real part when the cochain is complex).
void write_vtk_field(std::ostream& os, const TetMesh& mesh, const Eigen::VectorXcd& cochain,
                     const std::string& field_name);
void write_vtk_field_file(const std::string& path, const TetMesh& mesh,
                          const Eigen::VectorXcd& cochain, const std::string& field_name);

}  // namespace curlspec
