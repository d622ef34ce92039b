#ifndef PLAQ_H
#define PLAQ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PlaqStatus {
  PLAQ_STATUS_OK = 0,
  PLAQ_STATUS_NULL_POINTER = 1,
  PLAQ_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The cluster reached its truncation radius.
   */
  PLAQ_STATUS_ESCAPED = 3,
  PLAQ_STATUS_INTERNAL = 4,
  PLAQ_STATUS_PANIC = 5,
} PlaqStatus;

/**
 * Good-path cluster of the origin.
 */
typedef struct PlaqCluster PlaqCluster;

/**
 * Set of plaquettes bounding a cluster.
 */
typedef struct PlaqComplex PlaqComplex;

/**
 * Seeded Bernoulli bond configuration.
 */
typedef struct PlaqConfig PlaqConfig;

/**
 * Tri-state flags use -1 for "not computed".
 */
typedef struct PlaqTopology {
  uint32_t d;
  uint64_t n_facets;
  int64_t euler_characteristic;
  bool is_closed_manifold;
  bool is_connected;
  int8_t origin_inside;
  int8_t all_unoccupied;
  int8_t star_shaped;
  /**
   * 0 verified, 1 necessary conditions only, 2 failed.
   */
  uint8_t verdict;
} PlaqTopology;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *plaq_last_error_message(void);

/**
 * Static version string.
 */
const char *plaq_version(void);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum PlaqStatus plaq_config_new(uint32_t d, double p, uint64_t seed, struct PlaqConfig **out);

/**
 * Configuration of trial `trial` under `master_seed`, as used by the CLI.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum PlaqStatus plaq_config_for_trial(uint32_t d,
                                      uint64_t master_seed,
                                      uint64_t trial,
                                      double p,
                                      struct PlaqConfig **out);

/**
 * # Safety
 * `cfg` must come from `plaq_config_new` / `plaq_config_for_trial` and not be
 * used afterwards. NULL is ignored.
 */
void plaq_config_free(struct PlaqConfig *cfg);

/**
 * State of the bond from `base` (length `d` array) along `axis`.
 *
 * # Safety
 * `cfg` must be a live handle, `base` must point to `d` integers and
 * `occupied` to writable storage.
 */
enum PlaqStatus plaq_bond_occupied(const struct PlaqConfig *cfg,
                                   const int32_t *base,
                                   uint32_t axis,
                                   bool *occupied);

/**
 * Grows the good-path cluster of the origin up to l1 radius `r_max`.
 *
 * # Safety
 * `cfg` must be a live handle and `out` valid writable storage.
 */
enum PlaqStatus plaq_cluster_grow(const struct PlaqConfig *cfg,
                                  uint64_t r_max,
                                  struct PlaqCluster **out);

/**
 * # Safety
 * `cluster` must be a live handle or NULL (returns 0).
 */
size_t plaq_cluster_size(const struct PlaqCluster *cluster);

/**
 * # Safety
 * `cluster` must be a live handle or NULL (returns 0).
 */
uint64_t plaq_cluster_radius(const struct PlaqCluster *cluster);

/**
 * # Safety
 * `cluster` must be a live handle or NULL (returns false).
 */
bool plaq_cluster_escaped(const struct PlaqCluster *cluster);

/**
 * # Safety
 * `cluster` must come from `plaq_cluster_grow`; NULL is ignored.
 */
void plaq_cluster_free(struct PlaqCluster *cluster);

/**
 * Plaquettes dual to bonds with exactly one endpoint in the cluster.
 *
 * # Safety
 * `cluster` must be a live handle and `out` valid writable storage.
 */
enum PlaqStatus plaq_boundary_build(const struct PlaqCluster *cluster, struct PlaqComplex **out);

/**
 * # Safety
 * `complex` must be a live handle or NULL (returns 0).
 */
size_t plaq_complex_len(const struct PlaqComplex *complex);

/**
 * # Safety
 * `complex` must come from `plaq_boundary_build`; NULL is ignored.
 */
void plaq_complex_free(struct PlaqComplex *complex);

/**
 * Topology, occupancy and ray checks of `complex` against `cfg`.
 *
 * # Safety
 * `complex` and `cfg` must be live handles and `out` valid writable storage.
 */
enum PlaqStatus plaq_certify(const struct PlaqComplex *complex,
                             const struct PlaqConfig *cfg,
                             uint32_t n_rays,
                             uint64_t ray_seed,
                             struct PlaqTopology *out);

/**
 * Number of self-avoiding walks of length `k` from the origin of `Z^d`.
 *
 * # Safety
 * `out` must be valid writable storage.
 */
enum PlaqStatus plaq_saw_count(uint32_t d, uint32_t k, uint64_t *out);

/**
 * Wilson score interval for `hits` of `trials` at normal quantile `z`.
 *
 * # Safety
 * `lo` and `hi` must be valid writable storage.
 */
enum PlaqStatus plaq_wilson_interval(uint64_t hits,
                                     uint64_t trials,
                                     double z,
                                     double *lo,
                                     double *hi);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PLAQ_H */
