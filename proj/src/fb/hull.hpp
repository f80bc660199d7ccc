#pragma once

#include <vector>

#include "fb/mesh.hpp"
#include "fb/vec3.hpp"

namespace fb::ffmg {

// Quickhull. Returns the hull as a closed, outward-oriented triangle mesh
// whose vertices are the extreme input points; every input point lies inside
// or on the hull. Throws DegenerateInput for fewer than 4 effective points or
// a collinear/coplanar set.
TriangleMesh convex_hull(const std::vector<Vec3>& points);

} // namespace fb::ffmg
