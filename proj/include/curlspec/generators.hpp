#pragma once

#include "curlspec/tetmesh.hpp"

namespace curlspec {

/// Ball of the given radius, genus-0 boundary.  A structured Kuhn-subdivided
/// cube grid is mapped radially onto the ball; the grid has 2*2^refinement
/// cells per side, so h halves per refinement level.
TetMesh generate_ball(double radius, int refinement);

/// Solid torus of major radius R and tube radius r (R > r > 0), built by
/// revolving a structured disk mesh.  Tags: cut disk "sigma1" (meridian disk
/// at angle 0), curves "alpha1" (= boundary of the cut disk, the meridian)
/// and "beta1" (outer equator, the longitude), oriented so that the
/// intersection number alpha.beta = +1.
TetMesh generate_solid_torus(double R, double r, int refinement);

/// Handlebody of genus 0, 1 or 2 with tagged cycles and cut surfaces
/// (2*genus cycles "alphaJ"/"betaJ", genus cut surfaces "sigmaJ").
/// Genus 0 delegates to generate_ball, genus 1 to generate_solid_torus;
/// genus 2 is a slab with two square through-holes.
TetMesh generate_handlebody(int genus, int refinement);

}  // namespace curlspec
