#ifndef SMOOTHRECON_H
#define SMOOTHRECON_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum SrStatus {
  SR_STATUS_OK = 0,
  // A required pointer argument was null.
  SR_STATUS_NULL_ARGUMENT = 1,
  // File could not be opened, read or written.
  SR_STATUS_IO = 2,
  // File contents were malformed or empty.
  SR_STATUS_INPUT = 3,
  // A parameter was out of range.
  SR_STATUS_CONFIG = 4,
  // The solver met a non-finite value.
  SR_STATUS_SOLVER = 5,
  // A caller buffer was too small, or another invariant failed.
  SR_STATUS_INVALID = 6,
  // Internal error; the library state is unchanged.
  SR_STATUS_PANIC = 7,
} SrStatus;

// Triangle mesh in world coordinates.
typedef struct SrMesh SrMesh;

// Oriented point set in world coordinates.
typedef struct SrPointSet SrPointSet;

// Reconstruction settings. Start from [`sr_params_default`].
typedef struct SrParams {
  // Finest grid, vertices per axis.
  uint32_t grid[3];
  // Smoothness model 1-4.
  uint32_t energy;
  double lambda;
  double tol;
  uint32_t max_sweeps;
  uint32_t levels;
  // Nonzero keeps the field in [-1, 1].
  uint32_t clamp;
  // Fine-level band radius in cells; negative disables the band.
  double narrow_band_radius;
  uint32_t smoothing_passes;
  uint32_t margin_cells;
} SrParams;

// Fit and curvature statistics of one mesh.
typedef struct SrMetrics {
  uint64_t triangles;
  double rms;
  double avg_mean;
  double max_mean;
  double avg_gauss;
  double max_gauss;
  uint64_t excluded_vertices;
  uint64_t degenerate_triangles;
} SrMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or an empty string.
// Valid until the next failing call on the same thread.
const char *sr_last_error(void);

// Library version, a static string.
const char *sr_version(void);

// Fills `out` with the library defaults.
//
// # Safety
// `out` must be null or point to writable memory for one `SrParams`.
enum SrStatus sr_params_default(struct SrParams *out);

// Reads an oriented point set; the format follows the file extension
// (`.ply`, `.xyz`, `.obj`).
//
// # Safety
// `path` must be null or a NUL-terminated string; `out` must be null or
// writable.
enum SrStatus sr_points_load(const char *path, struct SrPointSet **out);

// Builds a point set from `count` interleaved xyz positions and normals.
//
// # Safety
// `points` and `normals` must each be null or hold `3 * count` doubles.
enum SrStatus sr_points_from_arrays(const double *points,
                                    const double *normals,
                                    size_t count,
                                    struct SrPointSet **out);

// Number of samples; 0 for null.
//
// # Safety
// `points` must be null or a live handle.
size_t sr_points_count(const struct SrPointSet *points);

// # Safety
// `points` must be null or a handle not freed before.
void sr_points_free(struct SrPointSet *points);

// Runs the full reconstruction. `params` may be null for the defaults.
//
// # Safety
// `points` must be a live handle; `params` null or valid; `out` writable.
enum SrStatus sr_reconstruct(const struct SrPointSet *points,
                             const struct SrParams *params,
                             struct SrMesh **out);

// # Safety
// `mesh` must be null or a live handle.
size_t sr_mesh_vertex_count(const struct SrMesh *mesh);

// # Safety
// `mesh` must be null or a live handle.
size_t sr_mesh_triangle_count(const struct SrMesh *mesh);

// Copies vertex positions as interleaved xyz. `capacity` counts doubles
// and must be at least three times the vertex count.
//
// # Safety
// `mesh` must be a live handle and `out` writable for `capacity` doubles.
enum SrStatus sr_mesh_copy_vertices(const struct SrMesh *mesh, double *out, size_t capacity);

// Copies triangle corner indices. `capacity` counts integers and must be
// at least three times the triangle count.
//
// # Safety
// `mesh` must be a live handle and `out` writable for `capacity` values.
enum SrStatus sr_mesh_copy_triangles(const struct SrMesh *mesh, uint32_t *out, size_t capacity);

// Writes the mesh; the format follows the extension (`.ply`, `.obj`).
//
// # Safety
// `mesh` must be a live handle; `path` a NUL-terminated string.
enum SrStatus sr_mesh_save(const struct SrMesh *mesh, const char *path);

// # Safety
// `mesh` must be null or a handle not freed before.
void sr_mesh_free(struct SrMesh *mesh);

// RMS distance from `points` to `mesh` and curvature statistics of `mesh`.
//
// # Safety
// `mesh` and `points` must be live handles; `out` writable.
enum SrStatus sr_metrics(const struct SrMesh *mesh,
                         const struct SrPointSet *points,
                         struct SrMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SMOOTHRECON_H */
