// Client-side login signing. The private key never leaves the browser:
// the server's challenge nonce is signed locally with WebCrypto and only
// the DER-hex signature goes over the wire.
//
// Key material, as shown by `gatechain authority list` / the key store:
//   public key  = uncompressed SEC1 point hex (04 || X || Y, 130 chars)
//   private key = raw scalar hex (64 chars)

export function hexToBytes(hex: string): Uint8Array {
  if (hex.length % 2 !== 0 || /[^0-9a-fA-F]/.test(hex)) {
    throw new Error("not a hex string");
  }
  const out = new Uint8Array(hex.length / 2);
  for (let i = 0; i < out.length; i++) {
    out[i] = parseInt(hex.slice(i * 2, i * 2 + 2), 16);
  }
  return out;
}

export function bytesToHex(bytes: Uint8Array): string {
  return [...bytes].map((b) => b.toString(16).padStart(2, "0")).join("");
}

function base64url(bytes: Uint8Array): string {
  let binary = "";
  for (const b of bytes) binary += String.fromCharCode(b);
  return btoa(binary).replace(/\+/g, "-").replace(/\//g, "_").replace(/=+$/, "");
}

/** JWK for a P-256 private key from the ledger's hex forms. */
export function privateKeyJwk(privateHex: string, publicHex: string): JsonWebKey {
  if (privateHex.length !== 64) throw new Error("private key must be 64 hex chars");
  if (publicHex.length !== 130 || !publicHex.startsWith("04")) {
    throw new Error("public key must be an uncompressed point (130 hex chars)");
  }
  const point = hexToBytes(publicHex);
  return {
    kty: "EC",
    crv: "P-256",
    d: base64url(hexToBytes(privateHex)),
    x: base64url(point.slice(1, 33)),
    y: base64url(point.slice(33, 65)),
  };
}

export async function importSigningKey(
  privateHex: string,
  publicHex: string,
): Promise<CryptoKey> {
  return crypto.subtle.importKey(
    "jwk",
    privateKeyJwk(privateHex, publicHex),
    { name: "ECDSA", namedCurve: "P-256" },
    false,
    ["sign"],
  );
}

function derInteger(bytes: Uint8Array): number[] {
  let start = 0;
  while (start < bytes.length - 1 && bytes[start] === 0 && bytes[start + 1]! < 0x80) {
    start++;
  }
  let value = [...bytes.slice(start)];
  if (value[0]! >= 0x80) value = [0, ...value]; // keep the integer positive
  return [0x02, value.length, ...value];
}

/** WebCrypto emits raw r||s (64 bytes); the server expects DER. */
export function rawSignatureToDer(raw: Uint8Array): Uint8Array {
  if (raw.length !== 64) throw new Error("raw P-256 signature must be 64 bytes");
  const r = derInteger(raw.slice(0, 32));
  const s = derInteger(raw.slice(32));
  return new Uint8Array([0x30, r.length + s.length, ...r, ...s]);
}

/**
 * Answer a login challenge: sign the ASCII nonce with ECDSA-SHA256.
 * The server verifies the signature against sha256(ascii(nonce)).
 */
export async function signChallenge(
  privateHex: string,
  publicHex: string,
  nonce: string,
): Promise<string> {
  const key = await importSigningKey(privateHex, publicHex);
  const raw = await crypto.subtle.sign(
    { name: "ECDSA", hash: "SHA-256" },
    key,
    new TextEncoder().encode(nonce),
  );
  return bytesToHex(rawSignatureToDer(new Uint8Array(raw)));
}
