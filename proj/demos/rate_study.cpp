// Decay of sup|I_phaseless - I_phased| with the receiver radius for a
// sound-hard circle, with and without noise.

#include <cstdio>

#include "dsmps/verify.hpp"

using namespace dsmps;

int main() {
  for (double delta : {0.0, 0.01}) {
    const auto rep = verify_theorem_planewave({.delta = delta});
    std::printf("noise %.2f\n%s\n", delta, rep.to_text().c_str());
  }
}
