#include "credentials.hpp"

#include <algorithm>
#include <sstream>

namespace lpsim {

Bytes LongTermCertificate::signing_bytes() const {
  ByteWriter w;
  w.str("LTC");
  w.u64(serial);
  w.str(node_id);
  w.bytes(public_key);
  return w.take();
}

Bytes Ticket::signing_bytes() const {
  ByteWriter w;
  w.str("TICKET");
  w.u64(serial);
  w.i64(t_s);
  return w.take();
}

Bytes PseudonymCertificate::signing_bytes() const {
  ByteWriter w;
  w.str("PC");
  w.u64(serial);
  w.bytes(public_key);
  w.u8(s);
  w.u32(group);
  w.i64(t_start);
  w.i64(t_end);
  return w.take();
}

std::string RevocationList::to_text() const {
  std::ostringstream os;
  os << "CRL v" << version << " t" << publish_time << "\n";
  for (uint64_t serial : revoked_pc_serials) os << "PC " << serial << "\n";
  for (uint64_t serial : revoked_ltc_serials) os << "LTC " << serial << "\n";
  return os.str();
}

RevocationList RevocationList::from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  RevocationList crl;
  if (!std::getline(is, line))
    throw SchemeError(ErrorCode::BadParameters, "empty CRL text");
  std::istringstream header(line);
  std::string tag, vt, tt;
  header >> tag >> vt >> tt;
  if (tag != "CRL" || vt.size() < 2 || tt.size() < 2 || vt[0] != 'v' || tt[0] != 't')
    throw SchemeError(ErrorCode::BadParameters, "bad CRL header");
  crl.version = std::stoull(vt.substr(1));
  crl.publish_time = std::stoll(tt.substr(1));
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kind;
    uint64_t serial;
    if (!(ls >> kind >> serial) || (kind != "PC" && kind != "LTC"))
      throw SchemeError(ErrorCode::BadParameters, "bad CRL entry: " + line);
    if (kind == "PC")
      crl.revoked_pc_serials.insert(serial);
    else
      crl.revoked_ltc_serials.insert(serial);
  }
  return crl;
}

std::vector<std::pair<Time, Time>> compute_lifetimes(Time t_s, Time gamma, Time tau) {
  if (tau <= 0 || gamma < tau || gamma % tau != 0 || t_s < 0)
    throw SchemeError(ErrorCode::BadParameters, "compute_lifetimes");
  Time gamma_end = (t_s / gamma + 1) * gamma;  // batch never crosses this boundary
  std::vector<std::pair<Time, Time>> windows;
  Time start = t_s;
  Time end = t_s - (t_s % tau) + tau;
  while (start < gamma_end) {
    windows.emplace_back(start, std::min(end, gamma_end));
    start = end;
    end += tau;
  }
  return windows;
}

CredentialSystem::CredentialSystem(crypto::Provider& provider, uint64_t seed, Time gamma,
                                   Time tau, double pr_serve, uint32_t groups)
    : provider_(provider),
      rng_(Rng(seed).fork(0xCA)),
      gamma_(gamma),
      tau_(tau),
      pr_serve_(pr_serve),
      groups_(groups) {
  if (tau <= 0 || gamma < tau || gamma % tau != 0 || pr_serve < 0.0 || pr_serve > 1.0 ||
      groups == 0)
    throw SchemeError(ErrorCode::BadParameters, "CredentialSystem config");
  ltca_root_ = provider_.generate_keypair(rng_);
  pca_root_ = provider_.generate_keypair(rng_);
  pca_.next_pc_serial = 0;
}

Time CredentialSystem::next_gamma_boundary(Time t_s) const {
  return (t_s / gamma_ + 1) * gamma_;
}

CredentialSystem::Registration CredentialSystem::register_node(const std::string& node_id) {
  if (ltca_nodes_.count(node_id))
    throw SchemeError(ErrorCode::AlreadyRegistered, node_id);
  crypto::KeyPair kp = provider_.generate_keypair(rng_);
  LongTermCertificate ltc;
  ltc.serial = next_ltc_serial_++;
  ltc.node_id = node_id;
  ltc.public_key = kp.public_key;
  ltc.issuer_sig = provider_.sign(ltca_root_.private_key, ltc.signing_bytes());
  ltca_nodes_[node_id] = LtcaNode{ltc, {}, {}};
  return Registration{ltc, kp.private_key};
}

Bytes CredentialSystem::ticket_request_bytes(Time t_s, uint64_t ltc_serial) {
  ByteWriter w;
  w.str("TICKET_REQ");
  w.i64(t_s);
  w.u64(ltc_serial);
  return w.take();
}

Ticket CredentialSystem::request_ticket(const LongTermCertificate& ltc, Time t_s,
                                        const Bytes& request_sig, Time now) {
  auto it = ltca_nodes_.find(ltc.node_id);
  if (it == ltca_nodes_.end())
    throw SchemeError(ErrorCode::UnknownNode, ltc.node_id);
  if (crl_.ltc_revoked(ltc.serial))
    throw SchemeError(ErrorCode::Revoked, ltc.node_id);
  if (!provider_.verify(it->second.ltc.public_key, ticket_request_bytes(t_s, ltc.serial),
                        request_sig))
    throw SchemeError(ErrorCode::BadSignature, "ticket request");

  // Pseudonym coverage implied by t_s: [t_s, next Gamma boundary).
  Time cover_end = next_gamma_boundary(t_s);
  for (const auto& [ws, we] : it->second.ticket_windows) {
    if (t_s < we && ws < cover_end)
      throw SchemeError(ErrorCode::OverlappingLifetime, ltc.node_id);
  }

  Ticket ticket;
  ticket.serial = next_ticket_serial_++;
  ticket.t_s = t_s;
  ticket.issuer_sig = provider_.sign(ltca_root_.private_key, ticket.signing_bytes());

  it->second.ticket_windows.emplace_back(t_s, cover_end);
  it->second.ticket_serials.push_back(ticket.serial);
  ltca_map_[ticket.serial] = ltc.node_id;
  (void)now;
  return ticket;
}

CredentialBatch CredentialSystem::issue_pseudonyms(const Ticket& ticket,
                                                   const std::vector<SelfSignedKey>& keys,
                                                   Rng& rng) {
  if (!provider_.verify(ltca_root_.public_key, ticket.signing_bytes(), ticket.issuer_sig))
    throw SchemeError(ErrorCode::BadSignature, "ticket");
  if (pca_.consumed_tickets.count(ticket.serial))
    throw SchemeError(ErrorCode::TicketReplay, "ticket already consumed");

  auto windows = compute_lifetimes(ticket.t_s, gamma_, tau_);
  if (keys.size() != windows.size())
    throw SchemeError(ErrorCode::CountMismatch, "one key per lifetime window required");
  for (const auto& key : keys) {
    if (!provider_.verify(key.public_key, key.public_key, key.self_sig))
      throw SchemeError(ErrorCode::BadSelfSignature, "self-signed public key");
  }

  uint8_t s = rng.bernoulli(pr_serve_) ? 1 : 0;
  uint32_t group = 0;
  if (s == 1 && groups_ > 1)
    group = static_cast<uint32_t>(rng.uniform_int(0, groups_ - 1));

  pca_.consumed_tickets.insert(ticket.serial);
  CredentialBatch batch;
  batch.ticket_serial = ticket.serial;
  for (size_t i = 0; i < windows.size(); ++i) {
    PseudonymCertificate pc;
    pc.serial = pca_.next_pc_serial++;
    pc.public_key = keys[i].public_key;
    pc.s = s;
    pc.group = group;
    pc.t_start = windows[i].first;
    pc.t_end = windows[i].second;
    pc.issuer_sig = provider_.sign(pca_root_.private_key, pc.signing_bytes());
    pca_.pca_map[pc.serial] = ticket.serial;
    ticket_pcs_[ticket.serial].push_back(pc.serial);
    pc_meta_[pc.serial] = PcMeta{pc.s, pc.group, pc.t_start, pc.t_end};
    batch.pcs.push_back(std::move(pc));
  }
  return batch;
}

std::string CredentialSystem::resolve(uint64_t pc_serial) const {
  auto pit = pca_.pca_map.find(pc_serial);
  if (pit == pca_.pca_map.end())
    throw SchemeError(ErrorCode::UnknownPC, std::to_string(pc_serial));
  auto lit = ltca_map_.find(pit->second);
  if (lit == ltca_map_.end())
    throw SchemeError(ErrorCode::UnknownPC, "dangling ticket");
  return lit->second;
}

bool CredentialSystem::node_revoked(const std::string& node_id) const {
  auto it = ltca_nodes_.find(node_id);
  return it != ltca_nodes_.end() && crl_.ltc_revoked(it->second.ltc.serial);
}

RevocationList CredentialSystem::revoke_node(const std::string& node_id, Time now) {
  auto it = ltca_nodes_.find(node_id);
  if (it == ltca_nodes_.end())
    throw SchemeError(ErrorCode::UnknownNode, node_id);
  crl_.revoked_ltc_serials.insert(it->second.ltc.serial);
  for (uint64_t ticket_serial : it->second.ticket_serials) {
    auto tp = ticket_pcs_.find(ticket_serial);
    if (tp == ticket_pcs_.end()) continue;
    for (uint64_t pc_serial : tp->second) {
      if (pc_meta_.at(pc_serial).t_end > now) crl_.revoked_pc_serials.insert(pc_serial);
    }
  }
  crl_.version++;
  crl_.publish_time = now;
  return crl_;
}

RevocationList CredentialSystem::publish_crl(Time now) {
  crl_.version++;
  crl_.publish_time = now;
  return crl_;
}

std::map<uint64_t, CredentialSystem::PcRecord> CredentialSystem::export_pc_table() const {
  std::map<uint64_t, PcRecord> table;
  for (const auto& [pc_serial, ticket_serial] : pca_.pca_map) {
    const std::string& nid = ltca_map_.at(ticket_serial);
    const LtcaNode& node = ltca_nodes_.at(nid);
    const PcMeta& meta = pc_meta_.at(pc_serial);
    table[pc_serial] = PcRecord{ticket_serial, nid,        node.ltc.serial, meta.s,
                                meta.group,    meta.t_start, meta.t_end};
  }
  return table;
}

}  // namespace lpsim
