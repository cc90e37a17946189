#include "fsoqkd/beam_optics.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "fsoqkd/constants.hpp"

namespace fsoqkd {

void GaussianBeam::validate() const {
    if (waist_radius_m <= 0.0) throw std::invalid_argument("beam waist must be > 0");
    if (wavelength_m <= 0.0) throw std::invalid_argument("wavelength must be > 0");
}

void TerminalPose::validate() const {
    if (excess_loss_db < 0.0) throw std::invalid_argument("excess loss must be >= 0 dB");
}

GaussianBeam collimate(const HexLattice& lattice, const CollimatorSpec& collimator,
                       double wavelength_m) {
    lattice.validate();
    collimator.validate();
    if (wavelength_m <= 0.0) throw std::invalid_argument("wavelength must be > 0");
    const double mode_waist = 0.5 * lattice.mode_field_diameter_m;
    GaussianBeam beam;
    beam.waist_radius_m = collimator.focal_length_m * wavelength_m / (std::numbers::pi * mode_waist);
    beam.wavelength_m = wavelength_m;
    return beam;
}

double rayleigh_range_m(const GaussianBeam& beam) {
    beam.validate();
    return std::numbers::pi * beam.waist_radius_m * beam.waist_radius_m / beam.wavelength_m;
}

double gaussian_overlap_loss_db(const Eigen::Vector2d& lateral_offset_m,
                                const Eigen::Vector2d& angular_offset_rad,
                                double waist_radius_m, double wavelength_m) {
    if (waist_radius_m <= 0.0 || wavelength_m <= 0.0)
        throw std::invalid_argument("waist and wavelength must be > 0");
    const double lateral = lateral_offset_m.squaredNorm() / (waist_radius_m * waist_radius_m);
    const double ang_scale = std::numbers::pi * waist_radius_m / wavelength_m;
    const double angular = angular_offset_rad.squaredNorm() * ang_scale * ang_scale;
    return constants::db_per_neper * (lateral + angular);
}

double pair_coupling_db(const Terminal& tx, const ElementIndex& tx_element,
                        const Terminal& rx, const ElementIndex& rx_element,
                        double distance_m, double wavelength_m) {
    if (distance_m <= 0.0) throw std::invalid_argument("link distance must be > 0");
    tx.pose.validate();
    rx.pose.validate();

    const GaussianBeam beam = collimate(tx.lattice, tx.collimator, wavelength_m);

    // Directions relative to the line of sight, in the shared transverse frame.
    const Eigen::Vector2d launch =
        steering_angle(tx.lattice, tx.collimator, tx_element) + tx.pose.boresight_error_rad;
    const Eigen::Vector2d acceptance =
        steering_angle(rx.lattice, rx.collimator, rx_element) + rx.pose.boresight_error_rad;

    const Eigen::Vector2d angular_mismatch = launch - acceptance;
    // Offset between the beam axis and the receive-mode axis, taken halfway
    // down the link; both pointing residuals walk the axes by L/2.
    const Eigen::Vector2d lateral_offset = 0.5 * distance_m * (launch + acceptance);

    return gaussian_overlap_loss_db(lateral_offset, angular_mismatch, beam.waist_radius_m,
                                    wavelength_m) +
           tx.pose.excess_loss_db + rx.pose.excess_loss_db;
}

BestPair CouplingMap::best() const {
    if (tx_ids.empty() || rx_ids.empty()) throw std::invalid_argument("empty coupling map");
    BestPair b{tx_ids[0], rx_ids[0], loss_db(0, 0)};
    for (Eigen::Index i = 0; i < loss_db.rows(); ++i)
        for (Eigen::Index j = 0; j < loss_db.cols(); ++j) {
            const double v = loss_db(i, j);
            const int ti = tx_ids[static_cast<std::size_t>(i)];
            const int rj = rx_ids[static_cast<std::size_t>(j)];
            if (v < b.loss_db ||
                (v == b.loss_db && (ti < b.tx_id || (ti == b.tx_id && rj < b.rx_id))))
                b = BestPair{ti, rj, v};
        }
    return b;
}

std::vector<double> CouplingMap::rx_slice(int tx_id) const {
    for (std::size_t i = 0; i < tx_ids.size(); ++i)
        if (tx_ids[i] == tx_id) {
            std::vector<double> row(rx_ids.size());
            for (std::size_t j = 0; j < rx_ids.size(); ++j)
                row[j] = loss_db(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            return row;
        }
    throw std::invalid_argument("tx id not present in coupling map");
}

CouplingMap simulate_coupling_map(const Terminal& tx, const Terminal& rx,
                                  const std::vector<int>& tx_ids,
                                  const std::vector<int>& rx_ids,
                                  double distance_m, double wavelength_m) {
    if (tx_ids.empty() || rx_ids.empty())
        throw std::invalid_argument("coupling map needs non-empty element subsets");
    CouplingMap map;
    map.tx_ids = tx_ids;
    map.rx_ids = rx_ids;
    map.distance_m = distance_m;
    map.loss_db.resize(static_cast<Eigen::Index>(tx_ids.size()),
                       static_cast<Eigen::Index>(rx_ids.size()));
    for (std::size_t i = 0; i < tx_ids.size(); ++i) {
        const ElementIndex te = element_from_id(tx.lattice, tx_ids[i]);
        for (std::size_t j = 0; j < rx_ids.size(); ++j) {
            const ElementIndex re = element_from_id(rx.lattice, rx_ids[j]);
            map.loss_db(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                pair_coupling_db(tx, te, rx, re, distance_m, wavelength_m);
        }
    }
    return map;
}

void coupling_map_to_csv(std::ostream& os, const CouplingMap& map) {
    os << "tx_id\\rx_id";
    for (int id : map.rx_ids) os << ',' << id;
    os << '\n';
    char cell[32];
    for (std::size_t i = 0; i < map.tx_ids.size(); ++i) {
        os << map.tx_ids[i];
        for (std::size_t j = 0; j < map.rx_ids.size(); ++j) {
            std::snprintf(cell, sizeof cell, "%.3f",
                          map.loss_db(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            os << ',' << cell;
        }
        os << '\n';
    }
}

std::string coupling_map_to_json(const CouplingMap& map, const TerminalPose& tx_pose,
                                 const TerminalPose& rx_pose, std::uint64_t seed) {
    nlohmann::json j;
    j["distance_m"] = map.distance_m;
    j["seed"] = seed;
    auto pose_json = [](const TerminalPose& p) {
        return nlohmann::json{
            {"position_m", {p.position_m.x(), p.position_m.y(), p.position_m.z()}},
            {"boresight_error_rad", {p.boresight_error_rad.x(), p.boresight_error_rad.y()}},
            {"excess_loss_db", p.excess_loss_db}};
    };
    j["tx_pose"] = pose_json(tx_pose);
    j["rx_pose"] = pose_json(rx_pose);
    j["tx_ids"] = map.tx_ids;
    j["rx_ids"] = map.rx_ids;
    std::vector<std::vector<double>> rows;
    rows.reserve(map.tx_ids.size());
    for (std::size_t i = 0; i < map.tx_ids.size(); ++i) {
        std::vector<double> row(map.rx_ids.size());
        for (std::size_t jcol = 0; jcol < map.rx_ids.size(); ++jcol)
            row[jcol] = map.loss_db(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(jcol));
        rows.push_back(std::move(row));
    }
    j["loss_db"] = rows;
    return j.dump(2);
}

}  // namespace fsoqkd
