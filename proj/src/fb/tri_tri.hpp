#pragma once

#include "fb/vec3.hpp"

namespace fb::validate {

// Moller-style triangle-triangle intersection test, coplanar overlap
// included. Touching counts as intersecting.
bool tri_tri_intersect(const Vec3& a0, const Vec3& a1, const Vec3& a2, const Vec3& b0,
                       const Vec3& b1, const Vec3& b2);

// Does segment [p,q] intersect triangle (t0,t1,t2)? Used by tests as an
// independent check on constructed crossing pairs.
bool segment_triangle_intersect(const Vec3& p, const Vec3& q, const Vec3& t0, const Vec3& t1,
                                const Vec3& t2);

} // namespace fb::validate
