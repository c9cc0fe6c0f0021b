#include "adtracker/accounts.hpp"

#include <sodium.h>

#include <algorithm>
#include <stdexcept>

namespace adtracker::accounts {

namespace {

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw std::runtime_error("libsodium failed to initialize");
}

std::size_t utf8_length(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

std::string random_token() {
  unsigned char raw[32];
  randombytes_buf(raw, sizeof raw);
  char hex[sizeof raw * 2 + 1];
  sodium_bin2hex(hex, sizeof hex, raw, sizeof raw);
  return hex;
}

std::string token_digest(const std::string& token) {
  unsigned char digest[crypto_generichash_BYTES];
  crypto_generichash(digest, sizeof digest, reinterpret_cast<const unsigned char*>(token.data()),
                     token.size(), nullptr, 0);
  char hex[sizeof digest * 2 + 1];
  sodium_bin2hex(hex, sizeof hex, digest, sizeof digest);
  return hex;
}

}  // namespace

PasswordHasher::PasswordHasher(HashStrength strength) {
  ensure_sodium();
  if (strength == HashStrength::Interactive) {
    opslimit_ = crypto_pwhash_OPSLIMIT_INTERACTIVE;
    memlimit_ = crypto_pwhash_MEMLIMIT_INTERACTIVE;
  } else {
    opslimit_ = crypto_pwhash_OPSLIMIT_MIN;
    memlimit_ = crypto_pwhash_MEMLIMIT_MIN;
  }
}

std::string PasswordHasher::hash(std::string_view password) const {
  char out[crypto_pwhash_STRBYTES];
  if (crypto_pwhash_str_alg(out, password.data(), password.size(), opslimit_, memlimit_,
                            crypto_pwhash_ALG_ARGON2ID13) != 0) {
    throw std::runtime_error("password hashing ran out of memory");
  }
  return out;
}

bool PasswordHasher::verify(const std::string& hash, std::string_view password) const {
  return crypto_pwhash_str_verify(hash.c_str(), password.data(), password.size()) == 0;
}

Decision authorize(const Account& user, Action action, const std::optional<JobResource>& job) {
  if (user.status != AccountStatus::Approved) return Decision::Deny;
  const bool manager = user.role == Role::Manager;
  switch (action) {
    case Action::ReviewAccount:
      return manager ? Decision::Allow : Decision::Deny;
    case Action::CreateJob:
    case Action::ReadAds:
      return Decision::Allow;
    case Action::ReadJob:
    case Action::ExportJob:
      if (!job) return Decision::Deny;
      return manager || job->owner == user.account_id || job->visibility == domain::Visibility::Public
                 ? Decision::Allow
                 : Decision::Deny;
    case Action::WriteJob:
    case Action::DeleteJob:
      if (!job) return Decision::Deny;
      return manager || job->owner == user.account_id ? Decision::Allow : Decision::Deny;
  }
  return Decision::Deny;
}

std::string normalize_email(std::string_view email) {
  auto b = email.find_first_not_of(" \t\r\n");
  auto e = email.find_last_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  std::string out = domain::ascii_lower(email.substr(b, e - b + 1));
  auto at = out.find('@');
  if (at == std::string::npos || at == 0 || at + 1 == out.size() || out.find('@', at + 1) != std::string::npos ||
      out.find_first_of(" \t") != std::string::npos) {
    return {};
  }
  return out;
}

AccountService::AccountService(store::Store& store, Clock& clock, HashStrength strength)
    : store_(store), clock_(clock), hasher_(strength) {}

Account AccountService::create(const std::string& email, std::string_view password, Role role,
                               AccountStatus status, Attestation attestation) {
  std::string normalized = normalize_email(email);
  if (normalized.empty()) throw Error(ErrorCode::BadRequest, "invalid email address");
  if (utf8_length(password) < kMinPasswordLength) {
    throw Error(ErrorCode::WeakPassword,
                "password must have at least " + std::to_string(kMinPasswordLength) + " characters");
  }
  Account account;
  account.email = normalized;
  account.password_hash = hasher_.hash(password);
  account.role = role;
  account.status = status;
  account.attestation = attestation;
  account.created_at = store::to_timestamp(clock_.now());
  return store_.create_account(std::move(account));
}

Account AccountService::sign_up(const std::string& email, std::string_view password, Attestation attestation) {
  return create(email, password, Role::Researcher, AccountStatus::Pending, attestation);
}

Account AccountService::bootstrap_manager(const std::string& email, std::string_view password) {
  return create(email, password, Role::Manager, AccountStatus::Approved, {true, true});
}

SessionToken AccountService::login(const std::string& email, std::string_view password) {
  auto account = store_.find_account_by_email(normalize_email(email));
  if (!account || !hasher_.verify(account->password_hash, password)) {
    throw Error(ErrorCode::Unauthenticated, "invalid email or password");
  }
  SessionToken session{random_token(), store::to_timestamp(clock_.now() + kSessionLifetime)};
  store_.put_session({token_digest(session.token), account->account_id, session.expires_at});
  return session;
}

Account AccountService::authenticate(const std::string& token) {
  if (token.empty()) throw Error(ErrorCode::Unauthenticated, "missing bearer token");
  auto session = store_.find_session(token_digest(token));
  if (!session || session->expires_at <= store::to_timestamp(clock_.now())) {
    throw Error(ErrorCode::Unauthenticated, "invalid or expired session");
  }
  auto account = store_.find_account(session->account_id);
  if (!account) throw Error(ErrorCode::Unauthenticated, "session account no longer exists");
  return *account;
}

SessionToken AccountService::renew(const std::string& token) {
  Account account = authenticate(token);
  SessionToken session{token, store::to_timestamp(clock_.now() + kSessionLifetime)};
  store_.put_session({token_digest(token), account.account_id, session.expires_at});
  return session;
}

void AccountService::logout(const std::string& token) { store_.delete_session(token_digest(token)); }

Account AccountService::review(AccountId reviewer, AccountId target, AccountStatus decision) {
  auto manager = store_.find_account(reviewer);
  if (!manager || authorize(*manager, Action::ReviewAccount) == Decision::Deny) {
    throw Error(ErrorCode::Unauthorized, "only managers review accounts");
  }
  if (decision == AccountStatus::Pending) {
    throw Error(ErrorCode::BadRequest, "decision must be APPROVED or REJECTED");
  }
  auto account = store_.find_account(target);
  if (!account) throw Error(ErrorCode::UnknownAccount, "unknown account");
  if (account->status != AccountStatus::Pending ||
      !store_.transition_account_status(target, AccountStatus::Pending, decision)) {
    throw Error(ErrorCode::InvalidState, "account was already reviewed");
  }
  account->status = decision;
  return *account;
}

std::vector<Account> AccountService::list(AccountId viewer, std::optional<AccountStatus> status) {
  auto manager = store_.find_account(viewer);
  if (!manager || authorize(*manager, Action::ReviewAccount) == Decision::Deny) {
    throw Error(ErrorCode::Unauthorized, "only managers list accounts");
  }
  return store_.list_accounts(status);
}

}  // namespace adtracker::accounts
