/* Selects the RVV intrinsics used by generated kernels: the real
 * <riscv_vector.h> on RISC-V targets, or the scalar emulation in
 * rvv_shim.h when built with -DRVV_EMULATE. */
#ifndef RVV_COMPAT_H
#define RVV_COMPAT_H

#include <stddef.h>

#ifdef RVV_EMULATE
#include "rvv_shim.h"
#else
#include <riscv_vector.h>
#endif

#endif /* RVV_COMPAT_H */
