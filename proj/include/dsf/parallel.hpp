#pragma once

namespace dsf {

/// Thread cap for internal loops: DSF_THREADS if set and positive, else the
/// OpenMP default. Reductions never run in parallel, so results do not depend
/// on this value.
int thread_count();

}  // namespace dsf
