// Mirror of the server's role matrix, for UI control visibility only.
// The server enforces permissions; this just hides controls a role
// cannot use.

import type { Role } from "./types.js";

export type Action =
  | "manage_authorities"
  | "register_entry"
  | "register_exit"
  | "list_records"
  | "verify_chain"
  | "view_stats";

export const ROLE_PERMISSIONS: Record<Role, readonly Action[]> = {
  admin: [
    "manage_authorities",
    "register_entry",
    "register_exit",
    "list_records",
    "verify_chain",
    "view_stats",
  ],
  officer: ["register_entry", "register_exit", "list_records"],
  auditor: ["list_records", "verify_chain", "view_stats"],
};

export function roleAllows(role: Role, action: Action): boolean {
  return ROLE_PERMISSIONS[role].includes(action);
}

export interface SectionVisibility {
  registerEntry: boolean;
  registerExit: boolean;
  records: boolean;
  verify: boolean;
  stats: boolean;
}

export function visibleSections(role: Role): SectionVisibility {
  return {
    registerEntry: roleAllows(role, "register_entry"),
    registerExit: roleAllows(role, "register_exit"),
    records: roleAllows(role, "list_records"),
    verify: roleAllows(role, "verify_chain"),
    stats: roleAllows(role, "view_stats"),
  };
}
