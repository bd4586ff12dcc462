#ifndef GRASPMAP_H
#define GRASPMAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum GmStatus {
  GM_STATUS_OK = 0,
  GM_STATUS_NULL_POINTER = 1,
  GM_STATUS_INVALID_ARGUMENT = 2,
  GM_STATUS_IO = 3,
  GM_STATUS_PARSE = 4,
  GM_STATUS_TOPOLOGY = 5,
  GM_STATUS_GEOMETRY = 6,
  GM_STATUS_KINEMATICS = 7,
  GM_STATUS_NUMERIC = 8,
  GM_STATUS_BUNDLE = 9,
  GM_STATUS_PIPELINE = 10,
  GM_STATUS_BUFFER_TOO_SMALL = 11,
  GM_STATUS_PANIC = 99,
} GmStatus;

// Hand kinematic chain.
typedef struct GmChain GmChain;

// Refined contact map for one intent.
typedef struct GmContactMap GmContactMap;

// Triangle mesh with its acceleration structure.
typedef struct GmMesh GmMesh;

// Damped least-squares solver settings.
typedef struct GmIkParams {
  uint32_t iterations;
  double lambda_dls;
  double eta;
  // Keep the first targets instead of reselecting them every iteration.
  bool fixed_targets;
  bool lock_wrist;
  // 0: thumb takes the upper half of the principal axis, 1: the lower half.
  uint32_t thumb_side;
} GmIkParams;

// Weights of the pose and contact rewards.
typedef struct GmRewardParams {
  double lambda_w;
  double lambda_phi;
  double lambda_theta;
  double beta;
  double beta_c;
  double kappa_horizon;
  double kappa_floor;
} GmRewardParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *gm_version(void);

// Message of the last failed call on this thread, or "" after a success.
// Valid until the next `gm_*` call on the same thread.
const char *gm_last_error(void);

// Loads a triangulated OBJ file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum GmStatus gm_mesh_load_obj(const char *path, struct GmMesh **out_mesh);

// Builds a mesh from `vertex_count` xyz triples and `triangle_count` index
// triples.
//
// # Safety
// The arrays must hold `3 * count` elements.
enum GmStatus gm_mesh_new(const double *vertices,
                          uintptr_t vertex_count,
                          const uint32_t *triangles,
                          uintptr_t triangle_count,
                          struct GmMesh **out_mesh);

// # Safety
// `mesh` must come from a `gm_mesh_*` constructor and not be used afterwards.
void gm_mesh_free(struct GmMesh *mesh);

// # Safety
// `mesh` must be a live handle or null.
bool gm_mesh_is_watertight(const struct GmMesh *mesh);

// Whether `point` lies inside the closed mesh.
//
// # Safety
// Pointers must be valid; `point` holds 3 doubles.
enum GmStatus gm_mesh_contains(const struct GmMesh *mesh, const double *point, bool *out_inside);

// Signed distance to the surface, negative inside.
//
// # Safety
// Pointers must be valid; `point` holds 3 doubles.
enum GmStatus gm_mesh_signed_distance(const struct GmMesh *mesh,
                                      const double *point,
                                      double *out_distance);

// Whether the segment `a`–`b` stays inside the volume at `samples`
// interior points; points within `surface_tol` of the surface count as inside.
//
// # Safety
// Pointers must be valid; `a` and `b` hold 3 doubles each.
enum GmStatus gm_mesh_segment_inside(const struct GmMesh *mesh,
                                     const double *a,
                                     const double *b,
                                     uintptr_t samples,
                                     double surface_tol,
                                     bool *out_inside);

// Built-in chain: "shadow", "allegro", or "planar".
//
// # Safety
// `name` must be NUL-terminated and `out_chain` valid.
enum GmStatus gm_chain_builtin(const char *name, struct GmChain **out_chain);

// Chain from a JSON chain document, or `builtin:<name>`.
//
// # Safety
// `path` must be NUL-terminated and `out_chain` valid.
enum GmStatus gm_chain_load(const char *path, struct GmChain **out_chain);

// # Safety
// `chain` must come from a `gm_chain_*` constructor and not be used afterwards.
void gm_chain_free(struct GmChain *chain);

// Number of actuated joints, or 0 for a null handle.
//
// # Safety
// `chain` must be a live handle or null.
uintptr_t gm_chain_dof(const struct GmChain *chain);

// Number of fingertips, or 0 for a null handle.
//
// # Safety
// `chain` must be a live handle or null.
uintptr_t gm_chain_finger_count(const struct GmChain *chain);

// World fingertip positions, `3 * finger_count` doubles written to `out_tips`.
//
// # Safety
// `w` and `phi` hold 3 doubles, `theta` holds `dof`, and `out_tips` has room
// for `out_len` doubles.
enum GmStatus gm_chain_forward_kinematics(const struct GmChain *chain,
                                          const double *w,
                                          const double *phi,
                                          const double *theta,
                                          uintptr_t dof,
                                          double *out_tips,
                                          uintptr_t out_len);

// Reads a contact map JSON document.
//
// # Safety
// `path` must be NUL-terminated and `out_map` valid.
enum GmStatus gm_contact_map_load(const char *path, struct GmContactMap **out_map);

// Contact map from `count` xyz points, all with score 1 and all seeds.
//
// # Safety
// `points` holds `3 * count` doubles.
enum GmStatus gm_contact_map_new(uintptr_t intent_id,
                                 const double *points,
                                 uintptr_t count,
                                 struct GmContactMap **out_map);

// # Safety
// `map` must come from a `gm_contact_map_*` constructor and not be used afterwards.
void gm_contact_map_free(struct GmContactMap *map);

// Number of points, or 0 for a null handle.
//
// # Safety
// `map` must be a live handle or null.
uintptr_t gm_contact_map_len(const struct GmContactMap *map);

// Copies the points, `3 * len` doubles, into `out_points`.
//
// # Safety
// `out_points` has room for `out_len` doubles.
enum GmStatus gm_contact_map_points(const struct GmContactMap *map,
                                    double *out_points,
                                    uintptr_t out_len);

struct GmIkParams gm_ik_params_default(void);

// Partitions `map` among the fingers and runs damped least-squares IK from
// the given initial pose. `w`, `phi`, and `theta` are overwritten with the
// result; `out_objective`, when not null, receives the final objective.
// `params` may be null for defaults.
//
// # Safety
// `w` and `phi` hold 3 doubles; `theta` holds `dof`.
enum GmStatus gm_solve_ik(const struct GmChain *chain,
                          const struct GmContactMap *map,
                          const struct GmIkParams *params,
                          double *w,
                          double *phi,
                          double *theta,
                          uintptr_t dof,
                          double *out_objective);

struct GmRewardParams gm_reward_params_default(void);

// Tracking score from wrist offset, rotation error, and joint errors.
// `params` may be null for defaults.
//
// # Safety
// `dw` and `dphi` hold 3 doubles; `dtheta` holds `dof`.
enum GmStatus gm_track_score(const struct GmRewardParams *params,
                             const double *dw,
                             const double *dphi,
                             const double *dtheta,
                             uintptr_t dof,
                             double *out_score);

// Pose-guidance weight at step `t`. `params` may be null for defaults.
//
// # Safety
// `params` must be valid or null.
double gm_kappa(const struct GmRewardParams *params, double t);

// # Safety
// `params` must be valid or null.
double gm_pose_reward(const struct GmRewardParams *params, double t, double r_track);

// # Safety
// `params` must be valid or null.
double gm_contact_reward(const struct GmRewardParams *params, bool contact, double r_track);

// Validates a scene bundle, runs every intent, and writes the outputs into
// `out_dir`. `config_path` may be null for defaults.
//
// # Safety
// String arguments must be NUL-terminated or (for `config_path`) null.
enum GmStatus gm_run_bundle(const char *bundle_dir, const char *out_dir, const char *config_path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRASPMAP_H */
