/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef LMG_BATTERY_H
#define LMG_BATTERY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum LmgStatus {
  LMG_STATUS_OK = 0,
  LMG_STATUS_NULL_POINTER = 1,
  LMG_STATUS_INVALID_ARGUMENT = 2,
  LMG_STATUS_NON_HERMITIAN = 3,
  LMG_STATUS_NUMERIC_FAILURE = 4,
  LMG_STATUS_BUFFER_TOO_SMALL = 5,
  LMG_STATUS_PANIC = 6,
} LmgStatus;

// Interaction prefactor of the subsystem battery Hamiltonian.
typedef enum LmgNormalization {
  // `2/M`.
  LMG_NORMALIZATION_SUBSYSTEM = 0,
  // `2/N`.
  LMG_NORMALIZATION_FULL = 1,
} LmgNormalization;

// Prepared quench: both spectra plus the time grid.
typedef struct LmgQuench LmgQuench;

// Diagonalized LMG Hamiltonian.
typedef struct LmgSpectrum LmgSpectrum;

// Model parameters: `N` spins, coupling `lambda`, anisotropy `gamma`,
// field `h`.
typedef struct LmgModel {
  size_t n;
  double lambda;
  double gamma;
  double h;
} LmgModel;

// Headline numbers of a bath charging run.
typedef struct LmgBathSummary {
  double w_max;
  double t_w_max;
  // Ergotropy at `t_w_max`.
  double ergotropy_at_w_max;
} LmgBathSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty if none. The
// pointer stays valid until the next failing call on the same thread.
const char *lmg_last_error(void);

// Library version as a static NUL-terminated string.
const char *lmg_version(void);

// Diagonalizes the LMG Hamiltonian of `model`.
enum LmgStatus lmg_spectrum_new(struct LmgModel model, struct LmgSpectrum **out);

// Number of levels, `N + 1`; 0 for a null handle.
size_t lmg_spectrum_len(const struct LmgSpectrum *spectrum);

// Eigenvalues in ascending order.
enum LmgStatus lmg_spectrum_eigenvalues(const struct LmgSpectrum *spectrum,
                                        double *out,
                                        size_t len);

// Releases a spectrum handle; null is a no-op.
void lmg_spectrum_free(struct LmgSpectrum *spectrum);

// Prepares a quench from the ground state of `model` to field `h_c`,
// sampled on `points` uniform times in `[0, t_max]`.
enum LmgStatus lmg_quench_new(struct LmgModel model,
                              double h_c,
                              double t_max,
                              size_t points,
                              struct LmgQuench **out);

// Number of time points; 0 for a null handle.
size_t lmg_quench_len(const struct LmgQuench *quench);

// Number of work-distribution points, `N + 1`; 0 for a null handle.
size_t lmg_quench_levels(const struct LmgQuench *quench);

enum LmgStatus lmg_quench_times(const struct LmgQuench *quench, double *out, size_t len);

// Stored work `W(t)` on the time grid.
enum LmgStatus lmg_quench_work(const struct LmgQuench *quench, double *out, size_t len);

// Work distribution: values `mu_k - eps_0` and their probabilities.
enum LmgStatus lmg_quench_work_distribution(const struct LmgQuench *quench,
                                            double *work,
                                            double *probability,
                                            size_t len);

// Long-time average of the stored work and its variance.
enum LmgStatus lmg_quench_long_time(const struct LmgQuench *quench, double *mean, double *variance);

// Ergotropy and work of the first `m` spins on the time grid.
// `normalization` is an [`LmgNormalization`] value. Either output may be
// null to skip it.
enum LmgStatus lmg_quench_subsystem(const struct LmgQuench *quench,
                                    size_t m,
                                    uint32_t normalization,
                                    double *ergotropy,
                                    double *work,
                                    size_t len);

// Releases a quench handle; null is a no-op.
void lmg_quench_free(struct LmgQuench *quench);

// Charges `model` from a Fock state of `n_init` photons at frequency
// `omega` and coupling `g`, with photon cutoff `n_max`, over `points`
// uniform times in `[0, t_max]`. Series outputs of length `points` may be
// null to skip them.
enum LmgStatus lmg_bath_run(struct LmgModel model,
                            double omega,
                            double g,
                            size_t n_init,
                            size_t n_max,
                            double t_max,
                            size_t points,
                            struct LmgBathSummary *summary,
                            double *work,
                            double *photons,
                            double *ergotropy,
                            size_t len);

// Closed-form energy of the `l`-th isotropic level (`gamma = 1`,
// `lambda = 1`), without the identity shift.
enum LmgStatus lmg_isotropic_energy(size_t n, double h, size_t l, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LMG_BATTERY_H */
