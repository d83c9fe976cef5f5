#pragma once

namespace sk {

// Selects the serial reference path or the OpenMP path of a kernel. Both
// paths must produce identical results; the serial one is kept for tests.
enum class Exec { serial, parallel };

void set_num_threads(int threads);
int max_threads();

}  // namespace sk
