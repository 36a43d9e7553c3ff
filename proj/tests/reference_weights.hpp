#pragma once

#include <map>
#include <string>

namespace testing_weights {

// Hand-set XOR weights for the default neuron parameters. i2 fires alone on
// (0,0) and (1,0) with latencies that put o1 near 2.0 and 2.5 ns; i1 takes
// over on (1,1) where i2 is inhibited.
inline std::map<std::string, double> reference() {
  return {{"A->i1", 5.7}, {"B->i1", 5.9}, {"bias->i1", -4.6}, {"A->i2", -5.4}, {"B->i2", -5.4},
          {"bias->i2", 7.0}, {"i1->o1", 7.0}, {"i2->o1", 7.0}, {"bias->o1", 0.0}};
}

}  // namespace testing_weights
