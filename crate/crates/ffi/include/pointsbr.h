#ifndef POINTSBR_H
#define POINTSBR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum PsbrStatus {
  PSBR_STATUS_OK = 0,
  PSBR_STATUS_NULL_POINTER = 1,
  PSBR_STATUS_INVALID_ARGUMENT = 2,
  PSBR_STATUS_INVALID_GEOMETRY = 3,
  PSBR_STATUS_IO = 4,
  PSBR_STATUS_FORMAT = 5,
  PSBR_STATUS_BACKEND = 6,
  PSBR_STATUS_PANIC = 7,
} PsbrStatus;

// Point samples of a target surface.
typedef struct PsbrCloud PsbrCloud;

// One geometry frame buffer: depth, normals and mask on a screen.
typedef struct PsbrGfb PsbrGfb;

// Oriented disks fused from frame buffers.
typedef struct PsbrSplats PsbrSplats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the calling thread's most recent failure, or null. The
// pointer stays valid until the next call on the same thread.
const char *psbr_last_error(void);

// Library version as a static NUL-terminated string.
const char *psbr_version(void);

// Loads a point cloud from an XYZ or PLY file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum PsbrStatus psbr_cloud_load(const char *path, struct PsbrCloud **out);

// Copies `count` points from `xyz` (interleaved x, y, z) into a new cloud.
//
// # Safety
// `xyz` must point to `3 * count` doubles; `out` must be writable.
enum PsbrStatus psbr_cloud_from_points(const double *xyz, uintptr_t count, struct PsbrCloud **out);

// Number of points in `cloud`, or 0 for null.
//
// # Safety
// `cloud` must be null or a live handle.
uintptr_t psbr_cloud_len(const struct PsbrCloud *cloud);

// # Safety
// `cloud` must be null or a handle not yet freed.
void psbr_cloud_free(struct PsbrCloud *cloud);

// Traces `cloud` from direction `(theta, phi)` in degrees at
// `frequency_hz` and refines the coarse depth with the classical backend.
//
// # Safety
// `cloud` must be a live handle; `out` must be writable.
enum PsbrStatus psbr_trace_refine(const struct PsbrCloud *cloud,
                                  double theta_deg,
                                  double phi_deg,
                                  double frequency_hz,
                                  struct PsbrGfb **out);

// Reads a GFB1 file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum PsbrStatus psbr_gfb_read(const char *path, struct PsbrGfb **out);

// Writes `gfb` as a GFB1 file.
//
// # Safety
// `gfb` must be a live handle; `path` a NUL-terminated string.
enum PsbrStatus psbr_gfb_write(const struct PsbrGfb *gfb, const char *path);

// Screen size and number of masked-in pixels of `gfb`.
//
// # Safety
// `gfb` must be a live handle; each output pointer must be writable.
enum PsbrStatus psbr_gfb_info(const struct PsbrGfb *gfb,
                              uintptr_t *width,
                              uintptr_t *height,
                              uintptr_t *hits);

// # Safety
// `gfb` must be null or a handle not yet freed.
void psbr_gfb_free(struct PsbrGfb *gfb);

// Edge-filters `count` frame buffers and fuses them into splats on a
// `resolution`³ grid.
//
// # Safety
// `gfbs` must point to `count` live handles; `out` must be writable.
enum PsbrStatus psbr_fuse(const struct PsbrGfb *const *gfbs,
                          uintptr_t count,
                          uintptr_t resolution,
                          struct PsbrSplats **out);

// Number of splats, or 0 for null.
//
// # Safety
// `splats` must be null or a live handle.
uintptr_t psbr_splats_len(const struct PsbrSplats *splats);

// Writes `splats` as an SPL1 file.
//
// # Safety
// `splats` must be a live handle; `path` a NUL-terminated string.
enum PsbrStatus psbr_splats_write(const struct PsbrSplats *splats, const char *path);

// # Safety
// `splats` must be null or a handle not yet freed.
void psbr_splats_free(struct PsbrSplats *splats);

// Monostatic RCS (dBsm) of `splats` from `(theta, phi)` in degrees with up
// to `max_bounce` reflections.
//
// # Safety
// `splats` must be a live handle; `out_dbsm` must be writable.
enum PsbrStatus psbr_rcs_splats(const struct PsbrSplats *splats,
                                double theta_deg,
                                double phi_deg,
                                double frequency_hz,
                                uintptr_t max_bounce,
                                double *out_dbsm);

// Single-bounce physical-optics monostatic RCS (dBsm) of `cloud`.
//
// # Safety
// `cloud` must be a live handle; `out_dbsm` must be writable.
enum PsbrStatus psbr_rcs_cloud(const struct PsbrCloud *cloud,
                               double theta_deg,
                               double phi_deg,
                               double frequency_hz,
                               double *out_dbsm);

// Reference RCS (dBsm) of a square plate of side `side_m` in the `z = 0`
// plane, traced on its exact triangle mesh.
//
// # Safety
// `out_dbsm` must be writable.
enum PsbrStatus psbr_plate_rcs(double side_m,
                               double theta_deg,
                               double phi_deg,
                               double frequency_hz,
                               double *out_dbsm);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POINTSBR_H */
