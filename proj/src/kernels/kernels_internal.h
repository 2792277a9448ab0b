#pragma once

#include "ues/kernels.h"

namespace ues::kernels {

namespace scalar {
extern const KernelTable kTable;
}

#ifdef UES_HAVE_AVX2_KERNELS
namespace avx2 {
extern const KernelTable kTable;
}
#endif

}  // namespace ues::kernels
