/* Scalar emulation of the three RVV v1.0 intrinsics emitted by rvvgen.
 *
 * vfloat32m1_t holds VLEN_BITS / 32 lanes and is passed by value. Lanes at
 * index >= vl are never read from or written to memory. vfmacc multiplies
 * and adds with two roundings; build with -ffp-contract=off so results are
 * bit-identical across hosts. */
#ifndef RVV_SHIM_H
#define RVV_SHIM_H

#include <stddef.h>

#ifndef VLEN_BITS
#error "rvv_shim.h requires VLEN_BITS (128, 256 or 512)"
#endif

#if VLEN_BITS != 128 && VLEN_BITS != 256 && VLEN_BITS != 512
#error "VLEN_BITS must be 128, 256 or 512"
#endif

#if defined(__clang__)
#pragma clang fp contract(off)
#endif

#define RVV_SHIM_LANES (VLEN_BITS / 32)

typedef struct {
  float lanes[RVV_SHIM_LANES];
} vfloat32m1_t;

static inline vfloat32m1_t __riscv_vle32_v_f32m1(const float* base, size_t vl) {
  vfloat32m1_t r;
  size_t i;
  for (i = 0; i < RVV_SHIM_LANES; ++i) r.lanes[i] = i < vl ? base[i] : 0.0f;
  return r;
}

static inline void __riscv_vse32_v_f32m1(float* base, vfloat32m1_t v, size_t vl) {
  size_t i;
  for (i = 0; i < vl && i < RVV_SHIM_LANES; ++i) base[i] = v.lanes[i];
}

/* vd + rs * vs on the first vl lanes; tail lanes keep vd. */
static inline vfloat32m1_t __riscv_vfmacc_vf_f32m1(vfloat32m1_t vd, float rs, vfloat32m1_t vs,
                                                   size_t vl) {
  vfloat32m1_t r = vd;
  size_t i;
  for (i = 0; i < vl && i < RVV_SHIM_LANES; ++i) {
    float prod = rs * vs.lanes[i];
    r.lanes[i] = vd.lanes[i] + prod;
  }
  return r;
}

#endif /* RVV_SHIM_H */
