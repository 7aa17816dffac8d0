#ifndef MARKOV_INFOGEO_H
#define MARKOV_INFOGEO_H

/* Generated by cbindgen from markov-infogeo-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Fisher matrix routes for `mig_family_fisher`.
typedef enum MigFisher {
  // Edge-measure second moment of the score.
  MIG_FISHER_DIRECT = 0,
  // Hessian of the log partition.
  MIG_FISHER_HESSIAN = 1,
} MigFisher;

// Geodesic kind selector for `mig_geodesic_point`.
typedef enum MigGeodesic {
  MIG_GEODESIC_E = 0,
  MIG_GEODESIC_M = 1,
} MigGeodesic;

// Status codes returned by every fallible function.
typedef enum MigStatus {
  MIG_OK = 0,
  MIG_NULL_ARGUMENT = 1,
  MIG_INVALID_UTF8 = 2,
  MIG_PARSE_ERROR = 3,
  MIG_GRAPH_ERROR = 4,
  MIG_DOMAIN_ERROR = 5,
  MIG_CONVERGENCE_ERROR = 6,
  MIG_BUFFER_TOO_SMALL = 7,
} MigStatus;

// Opaque exponential family of kernels.
typedef struct MigFamily MigFamily;

// Opaque strongly connected digraph.
typedef struct MigGraph MigGraph;

// Opaque Markov kernel.
typedef struct MigKernel MigKernel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread. The pointer stays
// valid until the next failing call on the same thread.
const char *mig_last_error_message(void);

// Library version as a static C string.
const char *mig_version(void);

// Frees a string returned by one of the `_to_json` functions.
//
// # Safety
// `s` must have been returned by this library and not freed before.
void mig_string_free(char *s);

// Parses {"states": [...], "edges": [{"from","to"}, ...]} into a graph.
//
// # Safety
// `json` must be a valid NUL-terminated string; `out` a valid pointer.
enum MigStatus mig_graph_from_json(const char *json, struct MigGraph **out);

// # Safety
// `g` must be a live graph handle or null.
void mig_graph_free(struct MigGraph *g);

size_t mig_graph_num_states(const struct MigGraph *g);

size_t mig_graph_num_edges(const struct MigGraph *g);

// Complete graph (self-loops included) on n states named "0".."n-1".
//
// # Safety
// `out` must be a valid pointer.
enum MigStatus mig_graph_complete(size_t n, struct MigGraph **out);

// Parses a kernel document.
//
// # Safety
// `json` must be a valid NUL-terminated string; `out` a valid pointer.
enum MigStatus mig_kernel_from_json(const char *json, struct MigKernel **out);

// Serializes a kernel; free the result with `mig_string_free`.
//
// # Safety
// `w` must be a live kernel handle; `out` a valid pointer.
enum MigStatus mig_kernel_to_json(const struct MigKernel *w, char **out);

// # Safety
// `w` must be a live kernel handle or null.
void mig_kernel_free(struct MigKernel *w);

size_t mig_kernel_num_states(const struct MigKernel *w);

size_t mig_kernel_num_edges(const struct MigKernel *w);

// Clones the kernel's graph into a standalone handle.
//
// # Safety
// `w` must be a live kernel handle; `out` a valid pointer.
enum MigStatus mig_kernel_graph(const struct MigKernel *w, struct MigGraph **out);

// Transition probabilities in canonical edge order; `probs` must hold
// `mig_kernel_num_edges` doubles.
//
// # Safety
// `w` must be a live kernel handle; `probs` a buffer of length `len`.
enum MigStatus mig_kernel_probs(const struct MigKernel *w, double *probs, size_t len);

// Stationary distribution; `probs` must hold `mig_kernel_num_states`
// doubles.
//
// # Safety
// `w` must be a live kernel handle; `probs` a buffer of length `len`.
enum MigStatus mig_kernel_stationary(const struct MigKernel *w, double *probs, size_t len);

// Edge measure in canonical edge order; `probs` must hold
// `mig_kernel_num_edges` doubles.
//
// # Safety
// `w` must be a live kernel handle; `probs` a buffer of length `len`.
enum MigStatus mig_kernel_edge_measure(const struct MigKernel *w, double *probs, size_t len);

// Normalizes per-edge values `f` (length = graph edges) into a kernel.
// With `exponentiate` false the values must be strictly positive; with it
// true they are arbitrary reals and exp(f) is normalized. Outputs the
// kernel handle, the log Perron root, and (optionally) the log
// eigenvector per state.
//
// # Safety
// `g` must be a live graph handle; `f` length `f_len`; `out_kernel` valid;
// `out_potential` either null or of length `mig_graph_num_states(g)`.
enum MigStatus mig_normalize(const struct MigGraph *g,
                             const double *f,
                             size_t f_len,
                             int exponentiate,
                             struct MigKernel **out_kernel,
                             double *out_log_perron,
                             double *out_potential);

// Point of the e- or m-geodesic between two kernels on the same graph.
//
// # Safety
// `w0`, `w1` must be live kernel handles; `out` a valid pointer.
enum MigStatus mig_geodesic_point(const struct MigKernel *w0,
                                  const struct MigKernel *w1,
                                  enum MigGeodesic kind,
                                  double t,
                                  struct MigKernel **out);

// KL divergence rate D(w1 | w2), in nats.
//
// # Safety
// `w1`, `w2` must be live kernel handles; `out` a valid pointer.
enum MigStatus mig_divergence(const struct MigKernel *w1, const struct MigKernel *w2, double *out);

// Exact KL between the n-step joint laws. `q1`/`q2` may be null to use the
// stationary distribution of the corresponding kernel; otherwise they are
// state-length probability vectors.
//
// # Safety
// Kernel handles must be live; non-null `q1`/`q2` must hold
// `mig_kernel_num_states` doubles; `out` must be valid.
enum MigStatus mig_kl_joint(const struct MigKernel *w1,
                            const struct MigKernel *w2,
                            const double *q1,
                            const double *q2,
                            size_t n,
                            double *out);

// Parses a family document {"graph", "carrier", "basis"}.
//
// # Safety
// `json` must be a valid NUL-terminated string; `out` a valid pointer.
enum MigStatus mig_family_from_json(const char *json, struct MigFamily **out);

// Serializes a family; free the result with `mig_string_free`.
//
// # Safety
// `f` must be a live family handle; `out` a valid pointer.
enum MigStatus mig_family_to_json(const struct MigFamily *f, char **out);

// The family covering every kernel on the graph (dimension |E| - |X|).
//
// # Safety
// `g` must be a live graph handle; `out` a valid pointer.
enum MigStatus mig_family_full(const struct MigGraph *g, struct MigFamily **out);

// # Safety
// `f` must be a live family handle or null.
void mig_family_free(struct MigFamily *f);

size_t mig_family_dim(const struct MigFamily *f);

size_t mig_family_effective_dim(const struct MigFamily *f);

// Kernel of the family at theta (length = family dimension); also writes
// the log partition when `out_psi` is non-null.
//
// # Safety
// `f` must be a live family handle; `theta` length `d`; `out` valid.
enum MigStatus mig_family_kernel_at(const struct MigFamily *f,
                                    const double *theta,
                                    size_t d,
                                    struct MigKernel **out,
                                    double *out_psi);

// Expectation parameter at theta; `out_eta` must hold `d` doubles.
//
// # Safety
// `f` live handle; `theta` and `out_eta` buffers of length `d`.
enum MigStatus mig_family_expectation(const struct MigFamily *f,
                                      const double *theta,
                                      size_t d,
                                      double *out_eta);

// Fisher matrix at theta, written row-major into `out_g` (d*d doubles).
//
// # Safety
// `f` live handle; `theta` length `d`; `out_g` length `d*d`.
enum MigStatus mig_family_fisher(const struct MigFamily *f,
                                 const double *theta,
                                 size_t d,
                                 enum MigFisher method,
                                 double *out_g);

// Inverts the expectation map: writes the theta with eta(theta) = eta.
// `theta0` may be null for a zero initial guess.
//
// # Safety
// `f` live handle; `eta`, `out_theta` (and `theta0` when non-null) length `d`.
enum MigStatus mig_family_theta_from_eta(const struct MigFamily *f,
                                         const double *eta,
                                         size_t d,
                                         const double *theta0,
                                         double *out_theta);

// Maximum likelihood fit of the family to an edge measure (length =
// graph edges, strictly positive, shift-invariant).
//
// # Safety
// `f` live handle; `target` length `target_len`; `out_theta` length =
// family dimension.
enum MigStatus mig_family_fit(const struct MigFamily *f,
                              const double *target,
                              size_t target_len,
                              double *out_theta);

// Normalized, shift-invariance-projected transition counts of a state
// trajectory given by graph state indices.
//
// # Safety
// `g` live graph handle; `trajectory` length `len`; `out_measure` must
// hold `mig_graph_num_edges(g)` doubles.
enum MigStatus mig_empirical_edge_measure(const struct MigGraph *g,
                                          const size_t *trajectory,
                                          size_t len,
                                          double *out_measure);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MARKOV_INFOGEO_H */
