#ifndef LATENTGRAPH_H
#define LATENTGRAPH_H

/* C interface of the latentgraph shared library.
 *
 * Every function returns an exit-style status code:
 *   0  success
 *   2  usage / configuration error (bad flags, malformed files)
 *   3  numeric failure (singular matrices, optimizer breakdown)
 * On failure lg_last_error() returns a message for the calling thread.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

const char* lg_last_error(void);

const char* lg_version(void);

/* Draw a dataset from a mixed-model description (JSON file) and write it as
 * long-format CSV; truth_csv (optional, may be NULL/empty) receives the
 * latent components. */
int lg_simulate(const char* spec_json, uint64_t seed, const char* out_csv,
                const char* truth_csv);

/* Predict cluster random components from a long-format CSV. spec_json may be
 * NULL/empty, in which case all margins are treated as Gaussian/identity. */
int lg_predict(const char* data_csv, const char* spec_json,
               const char* out_csv);

/* Estimate the latent covariance from a predictions CSV.
 * method: "sample" | "ml-gaussian" | "ml-elliptical"
 * family/nu/nodes only matter for ml-elliptical; divisor: "q-1" | "q". */
int lg_estimate_cov(const char* pred_csv, const char* method,
                    const char* family, double nu, int nodes,
                    const char* divisor, const char* out_json);

/* Test a block-diagonal hypothesis on a covariance JSON file.
 * blocks: comma-separated tested block sizes, e.g. "1,1".
 * coords: 1-based tested coordinates ("" = first coordinates in order).
 * condition: "rest" | "none" | 1-based comma list.
 * method: "gaussian" | "elliptical"; engine: "mc" | "series".
 * have_kappa != 0 uses kappa; otherwise kappa_data_csv (component rows)
 * supplies the kurtosis estimate for the elliptical method. */
int lg_test(const char* cov_json, const char* blocks, const char* coords,
            const char* condition, const char* method, const char* engine,
            double kappa, int have_kappa, const char* kappa_data_csv,
            const char* out_json);

/* Induce the latent concentration graph from a covariance JSON file via
 * pairwise conditional tests at level alpha.
 * correction: "none" | "holm" | "bonferroni". moral != 0 moralizes. */
int lg_graph(const char* cov_json, double alpha, const char* correction,
             const char* method, double kappa, int have_kappa, int moral,
             const char* dot_out, const char* json_out);

/* Run a rejection-rate sweep from a study configuration JSON file.
 * threads <= 0 picks the hardware concurrency. out_svg may be NULL/empty. */
int lg_power_study(const char* config_json, const char* out_csv,
                   const char* out_svg, int threads);

/* Kolmogorov-Smirnov uniformity check of a p-value CSV plus QQ plot. */
int lg_uniformity(const char* pvalues_csv, const char* out_json,
                  const char* out_svg);

/* ---- direct numeric entry points (no files) ---- */

/* One-sample KS test against Uniform(0,1). */
int lg_ks_uniform(const double* pvalues, size_t n, double* statistic,
                  double* pvalue);

/* Exact Gaussian block-independence test. cov is dim*dim row-major; the
 * first tested coordinates come first, conditioning last. engine:
 * "mc" | "series". */
int lg_gaussian_exact_test(const double* cov, int dim, const int* block_sizes,
                           int n_blocks, int cond_size, int q,
                           const char* engine, double* statistic,
                           double* pvalue);

/* Asymptotic elliptical block-independence test on a conditional scatter
 * matrix (tested part only, row-major). */
int lg_elliptical_test(const double* a_cond, int dim, const int* block_sizes,
                       int n_blocks, int q, double kappa_hat,
                       double* statistic, double* pvalue);

#ifdef __cplusplus
}
#endif

#endif /* LATENTGRAPH_H */
