#pragma once

namespace ratedml {

/// Execution path of a kernel. Serial and Parallel run the same algorithm,
/// with and without OpenMP. Reference selects the plain textbook algorithm
/// where one differs (tree growing); elsewhere it behaves like Serial. All
/// three produce bit-identical results.
enum class Exec { Serial, Parallel, Reference };

}  // namespace ratedml
