#include "fsoqkd/hex_lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fsoqkd {

void HexLattice::validate() const {
    if (pitch_m <= 0.0) throw std::invalid_argument("lattice pitch must be > 0");
    if (rings < 0) throw std::invalid_argument("lattice ring count must be >= 0");
    if (mode_field_diameter_m <= 0.0)
        throw std::invalid_argument("mode-field diameter must be > 0");
}

void CollimatorSpec::validate() const {
    if (focal_length_m <= 0.0) throw std::invalid_argument("focal length must be > 0");
    if (aperture_diameter_m <= 0.0)
        throw std::invalid_argument("aperture diameter must be > 0");
}

bool axial_in_lattice(const HexLattice& lattice, int q, int r) {
    const int n = lattice.rings;
    return std::abs(q) <= n && std::abs(r) <= n && std::abs(q + r) <= n;
}

namespace {

int row_first_q(int rings, int r) { return std::max(-rings, -r - rings); }
int row_last_q(int rings, int r) { return std::min(rings, -r + rings); }

}  // namespace

ElementIndex element_from_id(const HexLattice& lattice, int id) {
    if (id < 1 || id > lattice.element_count())
        throw std::invalid_argument("element id " + std::to_string(id) +
                                    " outside [1, " + std::to_string(lattice.element_count()) + "]");
    int next = 1;
    for (int r = lattice.rings; r >= -lattice.rings; --r) {
        const int q0 = row_first_q(lattice.rings, r);
        const int q1 = row_last_q(lattice.rings, r);
        const int row_len = q1 - q0 + 1;
        if (id < next + row_len) return ElementIndex{id, q0 + (id - next), r};
        next += row_len;
    }
    throw std::logic_error("element id scan exhausted");
}

ElementIndex element_from_axial(const HexLattice& lattice, int q, int r) {
    if (!axial_in_lattice(lattice, q, r))
        throw std::invalid_argument("axial coordinate (" + std::to_string(q) + ", " +
                                    std::to_string(r) + ") outside lattice");
    int id = 1;
    for (int row = lattice.rings; row > r; --row)
        id += row_last_q(lattice.rings, row) - row_first_q(lattice.rings, row) + 1;
    id += q - row_first_q(lattice.rings, r);
    return ElementIndex{id, q, r};
}

std::vector<ElementIndex> all_elements(const HexLattice& lattice) {
    std::vector<ElementIndex> out;
    out.reserve(static_cast<std::size_t>(lattice.element_count()));
    int id = 1;
    for (int r = lattice.rings; r >= -lattice.rings; --r)
        for (int q = row_first_q(lattice.rings, r); q <= row_last_q(lattice.rings, r); ++q)
            out.push_back(ElementIndex{id++, q, r});
    return out;
}

ElementIndex center_element(const HexLattice& lattice) {
    return element_from_axial(lattice, 0, 0);
}

std::vector<int> central_element_ids(const HexLattice& lattice, int count) {
    if (count < 1 || count > lattice.element_count())
        throw std::invalid_argument("central subset size outside lattice");
    auto elements = all_elements(lattice);
    std::vector<std::pair<double, int>> by_radius;
    by_radius.reserve(elements.size());
    for (const auto& e : elements)
        by_radius.emplace_back(element_position(lattice, e).norm(), e.id);
    std::sort(by_radius.begin(), by_radius.end());
    std::vector<int> ids;
    ids.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) ids.push_back(by_radius[static_cast<std::size_t>(i)].second);
    std::sort(ids.begin(), ids.end());
    return ids;
}

Eigen::Vector2d element_position(const HexLattice& lattice, const ElementIndex& idx) {
    if (!axial_in_lattice(lattice, idx.axial_q, idx.axial_r))
        throw std::invalid_argument("element outside lattice");
    const double q = idx.axial_q;
    const double r = idx.axial_r;
    return {lattice.pitch_m * (q + 0.5 * r),
            lattice.pitch_m * (std::numbers::sqrt3 / 2.0) * r};
}

Eigen::Vector2d steering_angle(const HexLattice& lattice, const CollimatorSpec& collimator,
                               const ElementIndex& idx) {
    return -element_position(lattice, idx) / collimator.focal_length_m;
}

double field_of_view_rad(const HexLattice& lattice, const CollimatorSpec& collimator) {
    return lattice.max_per_axis() * lattice.pitch_m / collimator.focal_length_m;
}

double field_of_view_deg(const HexLattice& lattice, const CollimatorSpec& collimator) {
    return field_of_view_rad(lattice, collimator) * 180.0 / std::numbers::pi;
}

double beam_footprint_m(const HexLattice& lattice, const CollimatorSpec& collimator,
                        double distance_m) {
    return field_of_view_rad(lattice, collimator) * distance_m;
}

FillFactor fill_factor(const HexLattice& lattice) {
    const double d = lattice.mode_field_diameter_m / lattice.pitch_m;
    const double ratio = d * d;
    return FillFactor{ratio, 10.0 * std::log10(ratio)};
}

}  // namespace fsoqkd
