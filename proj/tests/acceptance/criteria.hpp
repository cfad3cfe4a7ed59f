#pragma once

#include <string>

namespace acceptance {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome gradients();          // 1
Outcome topk_and_argmax();    // 2
Outcome gumbel_frequencies(); // 3
Outcome metric_oracle();      // 4
Outcome hard_split();         // 5
Outcome learns_task();        // 6
Outcome comparisons();        // 7
Outcome benchmark();          // 8
Outcome round_trips();        // 9

}  // namespace acceptance
