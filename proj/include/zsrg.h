/* zsrg: zero-shot reference game simulator, C API.
 *
 * Every function that can fail returns an int status code (ZSRG_OK on
 * success) and leaves a human-readable message in thread-local storage,
 * retrievable via zsrg_last_error(). Objects are opaque handles created by
 * the library and released with the matching *_free function; out-pointers
 * are written only on success.
 */
#ifndef ZSRG_H
#define ZSRG_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define ZSRG_OK 0
#define ZSRG_ERR_IO 1
#define ZSRG_ERR_PARSE 2
#define ZSRG_ERR_INVALID 3
#define ZSRG_ERR_UNSATISFIABLE 4
#define ZSRG_ERR_INTERNAL 5

typedef struct zsrg_corpus zsrg_corpus;
typedef struct zsrg_speaker zsrg_speaker;
typedef struct zsrg_table zsrg_table;
typedef struct zsrg_report zsrg_report;

typedef struct zsrg_decode_params {
  double alpha;
  double beta_repeat;
  size_t max_len;
  double listener_floor;
} zsrg_decode_params;

const char* zsrg_version(void);
/* Message of the last failing call on this thread; empty string if none. */
const char* zsrg_last_error(void);
/* Fills in the default decoding parameters (alpha 2, beta 2, max_len 10). */
void zsrg_decode_params_init(zsrg_decode_params* params);

/* ---- corpus ---------------------------------------------------------- */

int zsrg_corpus_load(const char* path, zsrg_corpus** out);
int zsrg_corpus_save(const zsrg_corpus* corpus, const char* path);
/* Generates the synthetic world of the config file's "world" section.
 * seed_override (used when has_seed_override != 0) replaces the world seed. */
int zsrg_corpus_generate(const char* config_path, int has_seed_override,
                         uint64_t seed_override, zsrg_corpus** out);
int zsrg_corpus_split(const zsrg_corpus* corpus, const char* const* zero_shot,
                      size_t n_zero_shot, zsrg_corpus** train, zsrg_corpus** test);
size_t zsrg_corpus_record_count(const zsrg_corpus* corpus);
size_t zsrg_corpus_category_count(const zsrg_corpus* corpus);
/* Borrowed pointer, valid while the corpus lives; NULL if out of range. */
const char* zsrg_corpus_category(const zsrg_corpus* corpus, size_t index);
size_t zsrg_corpus_vocab_size(const zsrg_corpus* corpus);
void zsrg_corpus_free(zsrg_corpus* corpus);

/* ---- literal speaker -------------------------------------------------- */

int zsrg_speaker_train(const zsrg_corpus* corpus, double smoothing_k,
                       int use_category, const char* const* attributes,
                       size_t n_attributes, zsrg_speaker** out);
int zsrg_speaker_save(const zsrg_speaker* speaker, const char* path);
int zsrg_speaker_load(const char* path, zsrg_speaker** out);
void zsrg_speaker_free(zsrg_speaker* speaker);

/* ---- word-category table ---------------------------------------------- */

int zsrg_table_estimate(const zsrg_corpus* corpus, double smoothing_k,
                        zsrg_table** out);
int zsrg_table_save(const zsrg_table* table, const char* path);
int zsrg_table_load(const char* path, zsrg_table** out);
size_t zsrg_table_category_count(const zsrg_table* table);
const char* zsrg_table_category(const zsrg_table* table, size_t index);
/* Smoothed P(word | category); out-of-vocabulary words get the floor. */
int zsrg_table_prob(const zsrg_table* table, const char* word,
                    const char* category, double* out);
/* Category-marginal listener score sum_c belief[c] * P(word|c). The belief
 * array must be aligned with the table's category order and have
 * zsrg_table_category_count entries. Raw (unnormalized) weights are
 * accepted. */
int zsrg_word_listener_score(const zsrg_table* table, const double* belief,
                             size_t n_belief, const char* word, double* out);
void zsrg_table_free(zsrg_table* table);

/* ---- generation and evaluation ---------------------------------------- */

#define ZSRG_SPEAKER_S0 0
#define ZSRG_SPEAKER_S1 1

/* Decodes one expression per record of `targets` (restricted to records
 * whose target has category `category_filter` when non-NULL) and writes
 * them as JSONL: {"scene_id":..,"target_id":..,"category":..,
 * "tokens":[..],"terminated":..}. mode ZSRG_SPEAKER_S1 requires a table;
 * belief_mode is "uniform" or "oracle". */
int zsrg_generate_to_file(const zsrg_speaker* speaker, const zsrg_table* table,
                          const zsrg_corpus* targets, const char* category_filter,
                          int mode, const char* belief_mode,
                          const zsrg_decode_params* params, const char* out_path);

/* Scores one speaker's generated expressions for one zero-shot category:
 * noun metrics plus TS-image / TS-distractors resolution accuracy, written
 * as a JSON object. config_path supplies the lexicon synonyms, the
 * similar-category map, ts_distractors_k and the sampling seed; the
 * expressions file must come from zsrg_generate_to_file over the same test
 * corpus. */
int zsrg_eval_to_file(const char* config_path, const zsrg_corpus* test,
                      const char* expressions_path, const zsrg_speaker* s_eval,
                      const zsrg_table* table_full, const char* category,
                      const char* out_path);

/* ---- experiment -------------------------------------------------------- */

/* Runs the full two-experiment protocol from a config file and writes
 * report.<ext> into out_dir (NULL: the config's output_dir) for each
 * requested format ("json", "csv", "md"; comma-separated; NULL means
 * "json"). On success *out (when non-NULL) receives the report. */
int zsrg_run_experiment(const char* config_path, int has_seed_override,
                        uint64_t seed_override, const char* out_dir,
                        const char* formats, zsrg_report** out);
int zsrg_report_load(const char* path, zsrg_report** out);
int zsrg_report_emit(const zsrg_report* report, const char* path,
                     const char* format);
void zsrg_report_free(zsrg_report* report);

#ifdef __cplusplus
}
#endif

#endif /* ZSRG_H */
