#pragma once

#include <cmath>

namespace fb {

// Plain value type for positions, directions and forces. Double throughout;
// optics works in units of the mirror radius, FFMG in normalized [-1,1] units.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3() = default;
    Vec3(double xx, double yy, double zz) : x(xx), y(yy), z(zz) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }

    Vec3& operator+=(const Vec3& o) {
        x += o.x; y += o.y; z += o.z;
        return *this;
    }
    Vec3& operator-=(const Vec3& o) {
        x -= o.x; y -= o.y; z -= o.z;
        return *this;
    }
    Vec3& operator*=(double s) {
        x *= s; y *= s; z *= s;
        return *this;
    }

    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    void set(int i, double v) {
        if (i == 0) x = v;
        else if (i == 1) y = v;
        else z = v;
    }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm2(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(norm2(v)); }

inline Vec3 normalized(const Vec3& v) {
    double n = norm(v);
    return {v.x / n, v.y / n, v.z / n};
}

inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

inline bool is_finite(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

// Half-infinite ray; `direction` is kept unit length by construction sites.
struct Ray {
    Vec3 origin;
    Vec3 direction;
};

} // namespace fb
