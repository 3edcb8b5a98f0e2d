#ifndef SUBETH_H
#define SUBETH_H

#include <stddef.h>
#include <stdint.h>

// Result codes. Zero is success.
typedef enum SubethStatus {
  SUBETH_STATUS_OK = 0,
  SUBETH_STATUS_NULL_POINTER = 1,
  SUBETH_STATUS_INVALID_ARGUMENT = 2,
  SUBETH_STATUS_DIMENSION_MISMATCH = 3,
  // Input is not a valid density matrix (Hermitian, unit trace, PSD).
  SUBETH_STATUS_INVALID_STATE = 4,
  // Reference state is singular where it must be invertible, or the
  // support condition fails.
  SUBETH_STATUS_SUPPORT = 5,
  SUBETH_STATUS_NUMERICAL = 6,
  SUBETH_STATUS_PARSE = 7,
  SUBETH_STATUS_PANIC = 8,
} SubethStatus;

// A validated density matrix.
typedef struct SubethDensity SubethDensity;

// Message of the last failure on this thread, or null. Valid until the next
// failing call on the same thread.
const char *subeth_last_error(void);

// Library version as a static string.
const char *subeth_version(void);

// Builds a density matrix from `dim × dim` row-major entries. `im` may be
// null for a real matrix.
//
// # Safety
// `re` (and `im` when non-null) must point to `dim * dim` doubles; `out`
// must be writable.
enum SubethStatus subeth_density_new(const double *re,
                                     const double *im,
                                     size_t dim,
                                     struct SubethDensity **out);

// Parses a state file (the JSON schema written by the `subeth` tools).
//
// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum SubethStatus subeth_density_from_json(const char *json, struct SubethDensity **out);

// Canonical state `e^{-βH}/Z` of a Hermitian `H`.
//
// # Safety
// As for [`subeth_density_new`].
enum SubethStatus subeth_gibbs_state(const double *h_re,
                                     const double *h_im,
                                     size_t dim,
                                     double beta,
                                     struct SubethDensity **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `state` must come from this library and not be used afterwards.
void subeth_density_free(struct SubethDensity *state);

// Hilbert dimension, or 0 for a null handle.
//
// # Safety
// `state` must be null or a live handle.
size_t subeth_density_dim(const struct SubethDensity *state);

// Copies the entries into caller buffers of `len ≥ dim²` doubles each.
// `im` may be null.
//
// # Safety
// Buffers must hold `len` doubles.
enum SubethStatus subeth_density_entries(const struct SubethDensity *state,
                                         double *re,
                                         double *im,
                                         size_t len);

// Eigenvalues in ascending order into `out[0..dim]`.
//
// # Safety
// `out` must hold `len` doubles.
enum SubethStatus subeth_density_eigenvalues(const struct SubethDensity *state,
                                             double *out,
                                             size_t len);

// Von Neumann entropy.
//
// # Safety
// `state` must be a live handle and `out` writable.
enum SubethStatus subeth_entropy(const struct SubethDensity *state, double *out);

// Umegaki relative entropy `S(σ‖ρ)`.
//
// # Safety
// Handles must be live and `out` writable.
enum SubethStatus subeth_umegaki(const struct SubethDensity *sigma,
                                 const struct SubethDensity *rho,
                                 double *out);

// BS relative entropy `Ŝ(σ‖ρ)` in closed form 1, 2 or 3; `ρ` must be
// invertible.
//
// # Safety
// Handles must be live and `out` writable.
enum SubethStatus subeth_bs_entropy(const struct SubethDensity *sigma,
                                    const struct SubethDensity *rho,
                                    int form,
                                    double *out);

// `½‖σ − ρ‖₁`
//
// # Safety
// Handles must be live and `out` writable.
enum SubethStatus subeth_trace_distance(const struct SubethDensity *sigma,
                                        const struct SubethDensity *rho,
                                        double *out);

// `V(ρ, J_ρ^{-1/2}(σ))`, the variance of the formal observable of `σ`.
//
// # Safety
// Handles must be live and `out` writable.
enum SubethStatus subeth_formal_variance(const struct SubethDensity *sigma,
                                         const struct SubethDensity *rho,
                                         double *out);

#endif  /* SUBETH_H */
