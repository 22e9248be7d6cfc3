#pragma once

namespace gdmopt {

// Training allocates and frees many mid-sized matrices per step. With the
// default glibc thresholds each one round-trips through mmap, which costs
// more than the arithmetic; this raises the thresholds so they are served
// from the heap. No-op on other allocators. Call once at program start.
void configure_allocator();

}  // namespace gdmopt
