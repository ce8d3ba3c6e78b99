const TOKEN_KEY = "crowdwalk.rater_token";

interface TokenStorage {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

function randomToken(): string {
  if (typeof crypto !== "undefined" && "randomUUID" in crypto) {
    return crypto.randomUUID();
  }
  return `r-${Date.now().toString(36)}-${Math.random().toString(36).slice(2, 12)}`;
}

/** Anonymous rater identity, stable across reloads on this browser profile. */
export function getRaterToken(storage: TokenStorage = localStorage): string {
  const existing = storage.getItem(TOKEN_KEY);
  if (existing) return existing;
  const token = randomToken();
  storage.setItem(TOKEN_KEY, token);
  return token;
}
