#pragma once

#include <array>
#include <string_view>

#include <Eigen/Dense>

namespace hvdcsim {

// Flat layout of the closed-loop state. Angles are measured in the frame
// rotating at nominal frequency, so a system resting at f0 has zero angle
// derivatives. Frequencies are stored as deviations from f0.
enum StateIndex : int {
  kThetaSys = 0,
  kDfSys,
  kDpM,
  kThetaMmcOn,
  kThetaMmcOff,
  kWOn,
  kWOff,
  kUdcOn,
  kUdcOff,
  kIdc,
  kIcirOn,
  kIcirOff,
  kDfVsg,
  kThetaOwpp,
  // controller block
  kPdFreqOn,
  kPdUdcOn,
  kPdFreqOff,
  kPdUdcOff,
  kPiOn,
  kPiOff,
  kStateSize
};

inline constexpr int kFirstControllerState = kPdFreqOn;

inline constexpr std::array<std::string_view, kStateSize> kStateNames = {
    "theta_sys",   "df_sys",      "dP_m",        "theta_mmc_on", "theta_mmc_off",
    "W_on",        "W_off",       "U_dc_on",     "U_dc_off",     "I_dc",
    "i_cir_on",    "i_cir_off",   "df_vsg",      "theta_owpp",   "pd_freq_on",
    "pd_udc_on",   "pd_freq_off", "pd_udc_off",  "pi_on",        "pi_off"};

template <typename Scalar>
using StateVector = Eigen::Matrix<Scalar, kStateSize, 1>;

using SimState = StateVector<double>;

/// Algebraic signals evaluated alongside the derivative.
template <typename Scalar>
struct DerivedSignals {
  Scalar p_ac_on{0};
  Scalar p_ac_off{0};
  Scalar p_dc_on{0};
  Scalar p_dc_off{0};
  Scalar i_dc_on{0};
  Scalar i_dc_off{0};
  Scalar u_sum0_on{0};
  Scalar u_sum0_off{0};
  Scalar u_hat_dc_on{0};
  Scalar p_owpp{0};  // deviation from P_ref
  Scalar df_on{0};   // formed frequency deviations of the MMCs
  Scalar df_off{0};
};

}  // namespace hvdcsim
