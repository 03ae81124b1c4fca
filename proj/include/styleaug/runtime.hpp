#pragma once

namespace styleaug {

/// Keeps freed training buffers in the heap instead of returning them to the
/// OS after every step (glibc only; a no-op elsewhere). Call once from main.
void tune_allocator();

}  // namespace styleaug
