// Hexagonal focal-plane fiber array: element indexing, positions, steering
// angles and the aggregate optical figures of one beamformer head.
#pragma once

#include <Eigen/Dense>

#include <vector>

namespace fsoqkd {

/// Hexagonal array of single-mode cores at the focal plane of a collimating
/// lens. `rings` counts the hexagon shells around the center core; 4 rings
/// give 1 + 3*4*5 = 61 cores with up to 9 per axis.
struct HexLattice {
    double pitch_m = 36.9e-6;
    int rings = 4;
    double mode_field_diameter_m = 8.4e-6;

    int element_count() const { return 1 + 3 * rings * (rings + 1); }
    int max_per_axis() const { return 2 * rings + 1; }
    void validate() const;
};

/// Collimating lens in front of the array.
struct CollimatorSpec {
    double focal_length_m = 0.150;
    double aperture_diameter_m = 0.0508;  // 2-inch optic
    void validate() const;
};

/// One lattice element. `id` is 1-based, assigned by a row-major scan of the
/// hexagon: rows ordered by decreasing y, each row left to right. The center
/// core of a 4-ring lattice therefore gets id 31.
struct ElementIndex {
    int id = 0;
    int axial_q = 0;
    int axial_r = 0;

    friend bool operator==(const ElementIndex&, const ElementIndex&) = default;
};

bool axial_in_lattice(const HexLattice& lattice, int q, int r);

ElementIndex element_from_id(const HexLattice& lattice, int id);
ElementIndex element_from_axial(const HexLattice& lattice, int q, int r);

/// All elements in id order (id == index + 1).
std::vector<ElementIndex> all_elements(const HexLattice& lattice);

ElementIndex center_element(const HexLattice& lattice);

/// The `count` elements closest to the lattice center (ties broken by id).
/// Used for the transmit-side switch, which exposes only a central subset.
std::vector<int> central_element_ids(const HexLattice& lattice, int count);

/// Focal-plane offset of an element: x = pitch*(q + r/2), y = pitch*sqrt(3)/2*r.
Eigen::Vector2d element_position(const HexLattice& lattice, const ElementIndex& idx);

/// Emission direction for a feed at this element, small-angle: -(x, y)/f.
/// One pitch step changes the angle by pitch/f.
Eigen::Vector2d steering_angle(const HexLattice& lattice, const CollimatorSpec& collimator,
                               const ElementIndex& idx);

/// Addressable angular range N*pitch/f across the widest axis.
double field_of_view_rad(const HexLattice& lattice, const CollimatorSpec& collimator);
double field_of_view_deg(const HexLattice& lattice, const CollimatorSpec& collimator);

/// Linear extent the field of view sweeps at range `distance_m`.
double beam_footprint_m(const HexLattice& lattice, const CollimatorSpec& collimator,
                        double distance_m);

struct FillFactor {
    double ratio;
    double db;
};

/// Mode-field fill of the focal plane, (MFD/pitch)^2.
FillFactor fill_factor(const HexLattice& lattice);

}  // namespace fsoqkd
