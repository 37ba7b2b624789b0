// Prints the three rate estimates against the cyclotron frequency, then the
// expulsion field of a small vortex dot for a few radii.
#include <cstdio>
#include <vector>

#include "magtunnel/magtunnel.hpp"

using namespace magtunnel;

int main() {
  const double alpha = 0.01;
  std::printf("%8s %10s %14s %14s %14s %10s\n", "omega_c", "S_cl", "closed", "determinant", "wkb", "wkb dev");
  for (double wc : {0.0, 0.5, 1.0, 1.5}) {
    const ModelParams p{1.0, wc, alpha, Continuation::Physical};
    const auto closed = decay_rate_closed_form(p);
    const auto pipe = assemble_rate(p, 10.0 / closed.Omega);
    const auto wkb = wkb_decay_rate(p);
    std::printf("%8.2f %10.4f %14.6e %14.6e %14.6e %9.2f%%\n", wc, closed.action, closed.gamma, pipe.Gamma, wkb.D,
                100.0 * (wkb.D / closed.gamma - 1.0));
  }

  VortexDot dot;
  const std::vector<double> radii{20, 30, 40, 60};
  const std::vector<Channel> channels{QuantumChannel{}, ThermalChannel{0.05, 1.0}};
  std::printf("\n%6s %8s %10s %12s\n", "R", "channel", "h*", "H*");
  for (const auto& row : radius_sweep(dot, radii, 1e-6, channels)) {
    if (row.ok)
      std::printf("%6.1f %8s %10.5f %12.6f\n", row.R, row.channel.c_str(), row.h_star, row.H_star);
    else
      std::printf("%6.1f %8s %s\n", row.R, row.channel.c_str(), row.status.c_str());
  }
}
