#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace hlsvd
{

enum class StructureType
{
    Cuboctahedral,
    Icosahedral,
    Decahedral,
};

inline constexpr std::array<StructureType, 3> kAllStructureTypes = {
    StructureType::Cuboctahedral, StructureType::Icosahedral, StructureType::Decahedral};

std::string_view to_string(StructureType t) noexcept;
/// Accepts "cuboctahedral"/"C", "icosahedral"/"I", "decahedral"/"D".
StructureType structure_type_from_string(std::string_view name);

/// Largest supported shell index.
inline constexpr int kMaxShells = 20;

/// Reference nearest-neighbour distance, in units of the fcc lattice constant.
inline constexpr double kNearestNeighbour = 0.70710678118654752440;

using Vec3 = std::array<double, 3>;

struct Cluster
{
    StructureType type = StructureType::Cuboctahedral;
    int shells = 0;
    std::vector<Vec3> positions;

    std::size_t n_atoms() const noexcept { return positions.size(); }
};

///
/// Closed-shell clusters around a central atom:
///  - Cuboctahedral: fcc sites inside the cuboctahedron of edge n
///  - Icosahedral: Mackay icosahedron, shell k holding 10k^2 + 2 atoms
///  - Decahedral: Ino decahedron, the pentagonal bipyramid of edge 2n made
///    of five strained fcc tetrahedra, truncated by {100} facets of side n
/// All three families give (10n^3 + 15n^2 + 11n + 3) / 3 atoms. Coordinates
/// are rescaled so that the minimum pairwise distance is exactly 1/sqrt(2).
///
/// Throws Unsupported for n outside [1, 20].
///
Cluster build_cluster(StructureType type, int shells);

/// Minimum pairwise distance (sweep along x).
double min_pair_distance(const std::vector<Vec3>& positions);

/// (10n^3 + 15n^2 + 11n + 3) / 3
std::int64_t magic_number(int shells);

} // namespace hlsvd
