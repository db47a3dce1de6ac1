/* C interface to the kgabduct core. Every call returns a status; on failure
 * kga_last_error() holds a message for the calling thread. Strings returned
 * through char** are owned by the caller and released with kga_string_free. */
#ifndef KGABDUCT_H
#define KGABDUCT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define KGA_API __attribute__((visibility("default")))
#else
#define KGA_API
#endif

typedef enum kga_status {
  KGA_OK = 0,
  KGA_ERR_IO = 1,
  KGA_ERR_PARSE = 2,
  KGA_ERR_INVALID_ARGUMENT = 3,
  KGA_ERR_FOREIGN_SYMBOL = 4,
  KGA_ERR_UNSATISFIABLE = 5,
  KGA_ERR_TOO_LARGE = 6,
  KGA_ERR_INTERNAL = 7
} kga_status;

typedef enum kga_triple_format {
  KGA_FORMAT_LABEL_TSV = 0,
  KGA_FORMAT_ID_TSV = 1
} kga_triple_format;

typedef struct kga_graph kga_graph;
typedef struct kga_split kga_split;
typedef struct kga_env kga_env;

KGA_API const char* kga_last_error(void);
/* "ok", "io", "parse", ... */
KGA_API const char* kga_status_name(kga_status status);
KGA_API void kga_string_free(char* s);

KGA_API kga_status kga_graph_load(const char* path, kga_triple_format format, kga_graph** out);
/* A triple file, a split directory (its train graph) or <split-dir>/<part>. */
KGA_API kga_status kga_graph_open(const char* ref, kga_graph** out);
KGA_API size_t kga_graph_num_entities(const kga_graph* g);
KGA_API size_t kga_graph_num_relations(const kga_graph* g);
KGA_API size_t kga_graph_num_edges(const kga_graph* g);
KGA_API void kga_graph_free(kga_graph* g);

KGA_API kga_status kga_split_edges(const kga_graph* g, uint32_t train, uint32_t valid,
                                   uint32_t test, uint64_t seed, kga_split** out);
KGA_API kga_status kga_split_read(const char* dir, kga_split** out);
KGA_API kga_status kga_split_write(const kga_split* s, const char* dir);
/* Partition sizes train, valid, test. */
KGA_API void kga_split_counts(const kga_split* s, size_t counts[3]);
/* Cumulative graph of a part ("train", "valid", "test"); a new handle. */
KGA_API kga_status kga_split_graph(const kga_split* s, const char* part, kga_graph** out);
KGA_API void kga_split_free(kga_split* s);

/* Writes train.jsonl, valid.jsonl, test.jsonl and vocab.txt into out_dir.
 * patterns is "all" or a comma list such as "1p,2in". The report is JSON
 * with per-split counts and warnings for patterns that fell short. */
KGA_API kga_status kga_sample(const kga_split* s, const char* patterns, const size_t counts[3],
                              uint64_t seed, unsigned workers, size_t max_observation,
                              const char* out_dir, char** report);

/* Per-pattern Jaccard and Smatch of a predictions file; JSON, or a text
 * table when pretty is nonzero. */
KGA_API kga_status kga_evaluate(const kga_graph* g, const char* predictions, unsigned workers,
                                uint64_t seed, int pretty, char** report);

/* One-hop search on train for every pair in the file, scored on eval. */
KGA_API kga_status kga_search(const kga_graph* train, const kga_graph* eval, const char* pairs,
                              unsigned workers, uint64_t seed, int pretty, char** report);

/* vocab_graph may be NULL when both files carry "hypothesis" objects. */
KGA_API kga_status kga_smatch_files(const kga_graph* vocab_graph, const char* pred,
                                    const char* gold, uint64_t seed, char** report);

KGA_API kga_status kga_env_create(const kga_graph* train, kga_env** out);
/* Answers one wire line (object or batch array). */
KGA_API kga_status kga_env_score_line(const kga_env* env, const char* line, unsigned workers,
                                      char** response);
/* Blocks serving listen ("unix:/path", "host:port", or "-" for stdin/stdout). */
KGA_API kga_status kga_env_serve(const kga_env* env, const char* listen, unsigned workers);
KGA_API void kga_env_free(kga_env* env);

#ifdef __cplusplus
}
#endif

#endif
