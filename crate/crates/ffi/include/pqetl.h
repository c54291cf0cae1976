#ifndef PQETL_H
#define PQETL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum PqetlStatus {
  PQETL_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  PQETL_STATUS_ERR_NULL = 1,
  /**
   * Malformed input, bad parameters, overspend or missing key.
   */
  PQETL_STATUS_ERR_INVALID = 2,
  /**
   * A proof or stored record failed verification.
   */
  PQETL_STATUS_ERR_VERIFY = 3,
  /**
   * File system failure.
   */
  PQETL_STATUS_ERR_IO = 4,
  /**
   * Output buffer too small; the required size was written.
   */
  PQETL_STATUS_ERR_BUFFER = 5,
  /**
   * Internal panic caught at the boundary.
   */
  PQETL_STATUS_ERR_PANIC = 6,
} PqetlStatus;

/**
 * A participant's secret key.
 */
typedef struct PqetlKey PqetlKey;

/**
 * Ledger state plus the file it is persisted to, if any.
 */
typedef struct PqetlLedger PqetlLedger;

/**
 * A transaction row.
 */
typedef struct PqetlTx PqetlTx;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *pqetl_version(void);

/**
 * Message for the last failed call on this thread (empty after success).
 * Valid until the next call on this thread.
 */
const char *pqetl_last_error(void);

/**
 * Creates an in-memory ledger.
 *
 * `params` names a parameter set (`"paper"`, `"desk"`) or a TOML file.
 * `genesis` holds `assets * parties` amounts, asset-major. `seed` points to
 * 32 bytes. `out_keys` receives `parties` key handles.
 */
enum PqetlStatus pqetl_ledger_setup(const char *params,
                                    size_t parties,
                                    size_t assets,
                                    bool compact,
                                    const int64_t *genesis,
                                    size_t genesis_len,
                                    const uint8_t *seed_ptr,
                                    struct PqetlLedger **out_ledger,
                                    struct PqetlKey **out_keys,
                                    size_t out_keys_len);

/**
 * Loads a ledger file. Later appends are written back to it.
 */
enum PqetlStatus pqetl_ledger_open(const char *file, struct PqetlLedger **out);

/**
 * Writes the ledger to a new file, which then receives later appends.
 */
enum PqetlStatus pqetl_ledger_save(struct PqetlLedger *l, const char *file);

void pqetl_ledger_free(struct PqetlLedger *l);

/**
 * Participant count, or 0 for a null handle.
 */
size_t pqetl_ledger_parties(const struct PqetlLedger *l);

/**
 * Asset count, or 0 for a null handle.
 */
size_t pqetl_ledger_assets(const struct PqetlLedger *l);

/**
 * Number of appended transactions, or 0 for a null handle.
 */
size_t pqetl_ledger_len(const struct PqetlLedger *l);

/**
 * Re-verifies key proofs and every transaction.
 */
enum PqetlStatus pqetl_ledger_verify(const struct PqetlLedger *l);

/**
 * Reads a key file belonging to `l`.
 */
enum PqetlStatus pqetl_key_read(const struct PqetlLedger *l,
                                const char *file,
                                struct PqetlKey **out);

/**
 * Writes a key file (owner-only permissions on Unix).
 */
enum PqetlStatus pqetl_key_write(const struct PqetlLedger *l,
                                 const struct PqetlKey *k,
                                 const char *file);

/**
 * Participant index of a key, or `SIZE_MAX` for a null handle.
 */
size_t pqetl_key_participant(const struct PqetlKey *k);

void pqetl_key_free(struct PqetlKey *k);

/**
 * Decrypts the key holder's balance of `asset`.
 */
enum PqetlStatus pqetl_balance(const struct PqetlLedger *l,
                               const struct PqetlKey *k,
                               size_t asset,
                               int64_t *out);

/**
 * Builds a transaction. `vals` holds `assets * parties` amounts,
 * asset-major. `keys` may hold any subset of the participants' keys;
 * every spender must be present. `force` skips the balance and overspend
 * checks so invalid rows can be produced for testing.
 */
enum PqetlStatus pqetl_tx_create(const struct PqetlLedger *l,
                                 const int64_t *vals,
                                 size_t vals_len,
                                 const struct PqetlKey *const *keys,
                                 size_t keys_len,
                                 const uint8_t *seed_ptr,
                                 bool force,
                                 struct PqetlTx **out);

/**
 * Verifies a transaction against the current ledger state without
 * appending it.
 */
enum PqetlStatus pqetl_tx_verify(const struct PqetlLedger *l, const struct PqetlTx *tx);

/**
 * Verifies and appends a transaction (persisting it when the ledger is
 * file-backed) and writes its row index to `out_index`. `tx` stays owned
 * by the caller.
 */
enum PqetlStatus pqetl_ledger_append(struct PqetlLedger *l,
                                     const struct PqetlTx *tx,
                                     size_t *out_index);

/**
 * Serializes a transaction. With `buf` null or `cap` too small, writes the
 * required size to `out_len` and returns `PQETL_ERR_BUFFER`.
 */
enum PqetlStatus pqetl_tx_encode(const struct PqetlLedger *l,
                                 const struct PqetlTx *tx,
                                 uint8_t *buf,
                                 size_t cap,
                                 size_t *out_len);

/**
 * Parses a serialized transaction. Does not verify it.
 */
enum PqetlStatus pqetl_tx_decode(const struct PqetlLedger *l,
                                 const uint8_t *bytes,
                                 size_t len,
                                 struct PqetlTx **out);

void pqetl_tx_free(struct PqetlTx *tx);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PQETL_H */
