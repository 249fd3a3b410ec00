#pragma once

#include <mutex>

namespace hlsvd::detail
{

// FFTW's planner is not thread-safe; every plan creation and destruction in
// the library goes through this lock. Executing existing plans does not.
std::mutex& fftw_planner_mutex();

} // namespace hlsvd::detail
