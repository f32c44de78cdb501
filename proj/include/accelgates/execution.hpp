#pragma once

namespace accelgates {

// Serial is the reference path; Parallel distributes independent work items
// with OpenMP and must produce bitwise-identical results.
enum class Execution { Serial, Parallel };

// Worker count used by Execution::Parallel (0 = OpenMP default).
void set_worker_count(int n);
int worker_count();

}  // namespace accelgates
