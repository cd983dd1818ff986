#pragma once

namespace sadq {

/// Keeps freed training-sized buffers (hundreds of KiB) inside the process
/// heap instead of returning them to the OS after every update. No-op
/// outside glibc. Call once from main().
void tune_allocator();

}  // namespace sadq
