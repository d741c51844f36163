#pragma once

//! \file chaboche.hpp
//! \brief Unified Chaboche viscoplastic model with combined isotropic and
//! kinematic hardening: rate equations and isotropic Hooke's law.

#include <algorithm>
#include <cmath>
#include <string>

#include "vpid/errors.hpp"
#include "vpid/sym_tensor.hpp"

namespace vpid {

//! \brief The nine material constants of the Chaboche model
struct MaterialParams {
    double kappa = 1.66e9;    //!< bulk modulus [Pa]
    double g = 7.69e8;        //!< shear modulus [Pa]
    double sigma_y = 1.7e8;   //!< yield stress [Pa]
    double n = 1.0;           //!< flow exponent [-]
    double k = 1.5e8;         //!< drag stress [Pa]
    double b_r = 50.0;        //!< isotropic saturation speed [-]
    double h_r = 0.5e8;       //!< isotropic asymptote [Pa]
    double b_chi = 50.0;      //!< kinematic saturation speed [-]
    double h_chi = 0.5e8;     //!< kinematic asymptote [Pa]

    friend bool operator==(const MaterialParams&, const MaterialParams&) = default;

    //! Throws InvalidArgument naming the first constant outside its admissible range.
    void validate() const {
        auto require = [](bool ok, const char* name) {
            if (!ok) throw InvalidArgument(std::string("material parameter out of range: ") + name);
        };
        require(kappa > 0.0, "kappa");
        require(g > 0.0, "g");
        require(sigma_y > 0.0, "sigma_y");
        require(k > 0.0, "k");
        require(n >= 1.0, "n");
        require(b_r >= 0.0, "b_r");
        require(b_chi >= 0.0, "b_chi");
        require(h_r >= 0.0, "h_r");
        require(h_chi >= 0.0, "h_chi");
    }

    //! Young's modulus 9 kappa G / (3 kappa + G).
    double youngs_modulus() const { return 9.0 * kappa * g / (3.0 * kappa + g); }
};

//! \brief Internal variables of the material point
struct InternalState {
    SymTensor2 eps_vp;  //!< viscoplastic strain
    double r = 0.0;     //!< isotropic hardening [Pa]
    SymTensor2 chi;     //!< back-stress [Pa]
    double p = 0.0;     //!< accumulated plastic strain

    friend bool operator==(const InternalState&, const InternalState&) = default;
};

//! \brief Time derivatives of every internal variable
struct RateBundle {
    SymTensor2 d_eps_vp;
    double d_r = 0.0;
    SymTensor2 d_chi;
    double d_p = 0.0;

    friend bool operator==(const RateBundle&, const RateBundle&) = default;
};

inline double equivalent_stress(const SymTensor2& sigma, const SymTensor2& chi) {
    return von_mises(sigma - chi);
}

//! Over-stress beyond the current yield radius; negative inside the surface.
inline double overstress(double sigma_eq, double r, double sigma_y) { return sigma_eq - sigma_y - r; }

//! \brief Gradient of the equivalent stress with respect to sigma
//! \param degenerate_below equivalent stress at or below which the direction is undefined
inline SymTensor2 flow_direction(const SymTensor2& sigma, const SymTensor2& chi, double degenerate_below) {
    const SymTensor2 d = deviator(sigma - chi);
    const double seq = std::sqrt(1.5 * ddot(d, d));
    if (!(seq > degenerate_below))
        throw DegenerateDirection("flow direction undefined: equivalent stress " + std::to_string(seq) +
                                  " at or below tolerance");
    return d * (1.5 / seq);
}

inline SymTensor2 flow_direction(const MaterialParams& params, const SymTensor2& sigma, const SymTensor2& chi) {
    return flow_direction(sigma, chi, 1e-6 * params.sigma_y);
}

//! <sigma_ex / k>^n, per unit reference time of one second.
inline double plastic_multiplier_rate(double sigma_ex, double k, double n) {
    if (sigma_ex <= 0.0) return 0.0;
    const double ratio = sigma_ex / k;
    return n == 1.0 ? ratio : std::pow(ratio, n);
}

inline RateBundle state_rates(const MaterialParams& params, const SymTensor2& sigma, const InternalState& state) {
    RateBundle rates;
    const double seq = equivalent_stress(sigma, state.chi);
    const double dp = plastic_multiplier_rate(overstress(seq, state.r, params.sigma_y), params.k, params.n);
    if (dp <= 0.0) return rates;

    // dp > 0 implies seq > sigma_y + r > 0, so the direction exists.
    const SymTensor2 dir = flow_direction(params, sigma, state.chi);
    rates.d_p = dp;
    rates.d_eps_vp = dir * dp;
    rates.d_r = params.b_r * (params.h_r - state.r) * dp;
    rates.d_chi = (dir * (2.0 / 3.0 * params.h_chi) - state.chi) * (params.b_chi * dp);
    return rates;
}

//! sigma = kappa tr(eps) I + 2 G dev(eps)
inline SymTensor2 hooke_apply(const MaterialParams& params, const SymTensor2& eps_e) {
    return SymTensor2::identity() * (params.kappa * eps_e.trace()) + deviator(eps_e) * (2.0 * params.g);
}

//! eps = tr(sigma) / (9 kappa) I + dev(sigma) / (2 G)
inline SymTensor2 hooke_inverse(const MaterialParams& params, const SymTensor2& sigma) {
    return SymTensor2::identity() * (sigma.trace() / (9.0 * params.kappa)) + deviator(sigma) / (2.0 * params.g);
}

}  // namespace vpid
