// Gaussian-beam collimation and pairwise element-to-element power coupling
// between two beamformer terminals, producing full coupling maps.
#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

#include "fsoqkd/hex_lattice.hpp"

namespace fsoqkd {

struct GaussianBeam {
    double waist_radius_m = 0.0;
    double wavelength_m = 1550.12e-9;
    Eigen::Vector2d center_offset_m = Eigen::Vector2d::Zero();
    Eigen::Vector2d direction_offset_rad = Eigen::Vector2d::Zero();
    void validate() const;
};

/// Collimated output of a fiber feed: waist w = f * lambda / (pi * MFD/2),
/// placed at the aperture plane.
GaussianBeam collimate(const HexLattice& lattice, const CollimatorSpec& collimator,
                       double wavelength_m);

/// z_R = pi w^2 / lambda. The flat-wavefront coupling model below assumes the
/// link is much shorter than this.
double rayleigh_range_m(const GaussianBeam& beam);

struct TerminalPose {
    Eigen::Vector3d position_m = Eigen::Vector3d::Zero();
    // Small-angle deviation of the terminal's optical axis from the line of
    // sight, expressed in the terminal's own transverse frame.
    Eigen::Vector2d boresight_error_rad = Eigen::Vector2d::Zero();
    // Switch + fiber-array insertion loss plus fitted residual imperfection.
    double excess_loss_db = 0.0;
    void validate() const;
};

/// One beamformer head: lattice + lens + pose + the element subset its
/// optical switch can reach.
struct Terminal {
    HexLattice lattice;
    CollimatorSpec collimator;
    TerminalPose pose;
    std::vector<int> switch_ids;  // ids reachable by the optical switch
};

/// Mode-overlap loss between two equal-waist collimated Gaussians separated
/// laterally by `lateral_offset_m` and angularly by `angular_offset_rad`:
///   loss_dB = (10/ln10) * ( |d|^2/w^2 + (pi w |a| / lambda)^2 )
/// Computed directly in dB so huge mismatches stay finite.
double gaussian_overlap_loss_db(const Eigen::Vector2d& lateral_offset_m,
                                const Eigen::Vector2d& angular_offset_rad,
                                double waist_radius_m, double wavelength_m);

/// Power coupling, in dB of loss, from one transmit element to one receive
/// element over a link of length `distance_m`. Launch and acceptance
/// directions combine element steering with each terminal's boresight error;
/// the lateral term is evaluated at the mid-link plane, which makes the
/// result exactly symmetric under exchanging the two terminals.
double pair_coupling_db(const Terminal& tx, const ElementIndex& tx_element,
                        const Terminal& rx, const ElementIndex& rx_element,
                        double distance_m, double wavelength_m);

struct BestPair {
    int tx_id = 0;
    int rx_id = 0;
    double loss_db = 0.0;
};

/// Loss matrix over the cross product of element subsets, rows = TX elements.
struct CouplingMap {
    std::vector<int> tx_ids;
    std::vector<int> rx_ids;
    Eigen::MatrixXd loss_db;
    double distance_m = 0.0;

    /// Minimum-loss pair; ties broken by (tx_id, rx_id) ascending.
    BestPair best() const;
    /// Losses toward every RX element for one TX element (row lookup by id).
    std::vector<double> rx_slice(int tx_id) const;
};

CouplingMap simulate_coupling_map(const Terminal& tx, const Terminal& rx,
                                  const std::vector<int>& tx_ids,
                                  const std::vector<int>& rx_ids,
                                  double distance_m, double wavelength_m);

/// CSV: header row of RX ids, one row per TX id, cells in dB with 3 decimals.
void coupling_map_to_csv(std::ostream& os, const CouplingMap& map);

/// JSON form with metadata (distance, poses, seed).
std::string coupling_map_to_json(const CouplingMap& map, const TerminalPose& tx_pose,
                                 const TerminalPose& rx_pose, std::uint64_t seed);

}  // namespace fsoqkd
