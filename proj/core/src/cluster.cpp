#include "hlsvd/cluster.hpp"

#include "hlsvd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <tuple>

namespace hlsvd
{

namespace
{

Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

double distance2(const Vec3& a, const Vec3& b)
{
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return dx * dx + dy * dy + dz * dz;
}

// Removes coincident points (shared edges and faces of the construction).
void deduplicate(std::vector<Vec3>& pts)
{
    constexpr double step = 1e-7;
    using Key = std::tuple<long long, long long, long long>;
    auto key = [&](const Vec3& p) {
        return Key{std::llround(p[0] / step), std::llround(p[1] / step), std::llround(p[2] / step)};
    };
    std::sort(pts.begin(), pts.end(), [&](const Vec3& a, const Vec3& b) { return key(a) < key(b); });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [&](const Vec3& a, const Vec3& b) { return key(a) == key(b); }),
              pts.end());
}

std::vector<Vec3> cuboctahedron(int n)
{
    // fcc sites with integer coordinates, nearest neighbours at (1, 1, 0).
    std::vector<Vec3> pts;
    for (int x = -n; x <= n; ++x)
        for (int y = -n; y <= n; ++y)
            for (int z = -n; z <= n; ++z) {
                if (((x + y + z) % 2) != 0)
                    continue;
                if (std::abs(x) + std::abs(y) + std::abs(z) > 2 * n)
                    continue;
                pts.push_back({double(x), double(y), double(z)});
            }
    return pts;
}

std::vector<Vec3> icosahedron(int n)
{
    const double phi = std::numbers::phi;
    std::vector<Vec3> v;
    for (double s1 : {-1.0, 1.0})
        for (double s2 : {-1.0, 1.0}) {
            v.push_back({0.0, s1, s2 * phi});
            v.push_back({s1, s2 * phi, 0.0});
            v.push_back({s2 * phi, 0.0, s1});
        }

    // Edges have length 2; faces are mutually adjacent vertex triples.
    auto adjacent = [&](std::size_t i, std::size_t j) {
        return std::abs(distance2(v[i], v[j]) - 4.0) < 1e-9;
    };
    std::vector<std::array<std::size_t, 3>> faces;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j)
            for (std::size_t k = j + 1; k < v.size(); ++k)
                if (adjacent(i, j) && adjacent(j, k) && adjacent(i, k))
                    faces.push_back({i, j, k});

    std::vector<Vec3> pts{{0.0, 0.0, 0.0}};
    for (int shell = 1; shell <= n; ++shell)
        for (const auto& f : faces)
            for (int p = 0; p <= shell; ++p)
                for (int q = 0; p + q <= shell; ++q) {
                    const int r = shell - p - q;
                    pts.push_back(double(p) * v[f[0]] + double(q) * v[f[1]] + double(r) * v[f[2]]);
                }
    deduplicate(pts);
    return pts;
}

std::vector<Vec3> ino_decahedron(int n)
{
    // Pentagonal bipyramid of edge m = 2n from five tetrahedra sharing the
    // axis A0-A1; sites are integer barycentric combinations over m.
    // Keeping c + e <= n (weight on the rim vertices) cuts the {100} facets.
    const int m = 2 * n;
    const double md = static_cast<double>(m);
    const double rho = md * std::sqrt(3.0) / 2.0;
    const Vec3 a0{0.0, 0.0, 0.0};
    const Vec3 a1{0.0, 0.0, md};
    std::array<Vec3, 5> rim;
    for (int i = 0; i < 5; ++i) {
        const double ang = 2.0 * std::numbers::pi * i / 5.0;
        rim[static_cast<std::size_t>(i)] = {rho * std::cos(ang), rho * std::sin(ang), md / 2.0};
    }

    std::vector<Vec3> pts;
    for (std::size_t t = 0; t < 5; ++t) {
        const Vec3& r0 = rim[t];
        const Vec3& r1 = rim[(t + 1) % 5];
        for (int c = 0; c <= n; ++c)
            for (int e = 0; c + e <= n; ++e)
                for (int a = 0; a + c + e <= m; ++a) {
                    const int b = m - a - c - e;
                    Vec3 p = (double(a) / md) * a0 + (double(b) / md) * a1 + (double(c) / md) * r0 +
                             (double(e) / md) * r1;
                    p[2] -= md / 2.0;
                    pts.push_back(p);
                }
    }
    deduplicate(pts);
    return pts;
}

} // namespace

std::string_view to_string(StructureType t) noexcept
{
    switch (t) {
    case StructureType::Cuboctahedral: return "cuboctahedral";
    case StructureType::Icosahedral: return "icosahedral";
    case StructureType::Decahedral: return "decahedral";
    }
    return "unknown";
}

StructureType structure_type_from_string(std::string_view name)
{
    if (name == "cuboctahedral" || name == "C")
        return StructureType::Cuboctahedral;
    if (name == "icosahedral" || name == "I")
        return StructureType::Icosahedral;
    if (name == "decahedral" || name == "D")
        return StructureType::Decahedral;
    throw Error(ErrorKind::InvalidArgument, "unknown structure type '" + std::string(name) + "'");
}

std::int64_t magic_number(int shells)
{
    const std::int64_t n = shells;
    return (10 * n * n * n + 15 * n * n + 11 * n + 3) / 3;
}

double min_pair_distance(const std::vector<Vec3>& positions)
{
    if (positions.size() < 2)
        return std::numeric_limits<double>::infinity();
    // Sweep along x: only points within the current best x-window can improve.
    std::vector<Vec3> pts = positions;
    std::sort(pts.begin(), pts.end(), [](const Vec3& a, const Vec3& b) { return a[0] < b[0]; });
    double best2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double dx = pts[j][0] - pts[i][0];
            if (dx * dx >= best2)
                break;
            best2 = std::min(best2, distance2(pts[i], pts[j]));
        }
    return std::sqrt(best2);
}

Cluster build_cluster(StructureType type, int shells)
{
    if (shells < 1 || shells > kMaxShells)
        throw Error(ErrorKind::Unsupported, "shell count " + std::to_string(shells) +
                                                " outside [1, " + std::to_string(kMaxShells) + "]");
    Cluster c;
    c.type = type;
    c.shells = shells;
    switch (type) {
    case StructureType::Cuboctahedral: c.positions = cuboctahedron(shells); break;
    case StructureType::Icosahedral: c.positions = icosahedron(shells); break;
    case StructureType::Decahedral: c.positions = ino_decahedron(shells); break;
    }
    const double scale = kNearestNeighbour / min_pair_distance(c.positions);
    for (auto& p : c.positions)
        p = scale * p;
    return c;
}

} // namespace hlsvd
