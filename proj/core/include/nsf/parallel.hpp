#pragma once

#include <functional>

namespace nsf {

// Runs fn(i) for every i in [begin, end), distributing indices over up to
// hardware_concurrency() threads. fn must be safe to call concurrently for
// distinct indices. Exceptions thrown by fn are rethrown on the caller.
void parallel_for(int begin, int end, const std::function<void(int)>& fn);

}  // namespace nsf
