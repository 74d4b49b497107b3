// Client-side form validation. Submit stays disabled until every required
// field is present and well-formed; the server still re-validates.

const DATE_RE = /^\d{4}-\d{2}-\d{2}$/;
const DATETIME_RE = /^\d{4}-\d{2}-\d{2} \d{2}:\d{2}$/;

export interface EntryFormFields {
  passport_number: string;
  name_surname: string;
  nationality: string;
  birthdate: string;
  passport_validity_date: string;
  entry_gate: string;
  entry_datetime: string;
  plate: string;
}

export interface ExitFormFields {
  passport_number: string;
  exit_gate: string;
  exit_datetime: string;
  plate: string;
}

export type FieldErrors<T> = Partial<Record<keyof T, string>>;

function isRealDate(value: string): boolean {
  const [year, month, day] = value.split("-").map(Number);
  if (!year || !month || !day) return false;
  const parsed = new Date(Date.UTC(year, month - 1, day));
  return (
    parsed.getUTCFullYear() === year &&
    parsed.getUTCMonth() === month - 1 &&
    parsed.getUTCDate() === day
  );
}

function checkDate(value: string): string | null {
  if (!DATE_RE.test(value) || !isRealDate(value)) return "use YYYY-MM-DD";
  return null;
}

function checkDateTime(value: string): string | null {
  if (!DATETIME_RE.test(value)) return "use YYYY-MM-DD HH:MM";
  const [day = "", time = ""] = value.split(" ");
  if (!isRealDate(day)) return "use YYYY-MM-DD HH:MM";
  const [hour = -1, minute = -1] = time.split(":").map(Number);
  if (hour < 0 || hour > 23 || minute < 0 || minute > 59) return "use YYYY-MM-DD HH:MM";
  return null;
}

export function validateEntryForm(fields: EntryFormFields): FieldErrors<EntryFormFields> {
  const errors: FieldErrors<EntryFormFields> = {};
  if (!fields.passport_number.trim()) errors.passport_number = "required";
  if (!fields.name_surname.trim()) errors.name_surname = "required";
  if (!fields.nationality.trim()) errors.nationality = "required";
  if (!fields.entry_gate.trim()) errors.entry_gate = "required";

  const birthdate = fields.birthdate.trim()
    ? checkDate(fields.birthdate)
    : "required";
  if (birthdate) errors.birthdate = birthdate;
  const validity = fields.passport_validity_date.trim()
    ? checkDate(fields.passport_validity_date)
    : "required";
  if (validity) errors.passport_validity_date = validity;
  const entryAt = fields.entry_datetime.trim()
    ? checkDateTime(fields.entry_datetime)
    : "required";
  if (entryAt) errors.entry_datetime = entryAt;

  if (
    !errors.passport_validity_date &&
    !errors.entry_datetime &&
    fields.passport_validity_date < fields.entry_datetime.slice(0, 10)
  ) {
    errors.passport_validity_date = "passport expires before the entry date";
  }
  return errors;
}

export function validateExitForm(fields: ExitFormFields): FieldErrors<ExitFormFields> {
  const errors: FieldErrors<ExitFormFields> = {};
  if (!fields.passport_number.trim()) errors.passport_number = "required";
  if (!fields.exit_gate.trim()) errors.exit_gate = "required";
  const exitAt = fields.exit_datetime.trim()
    ? checkDateTime(fields.exit_datetime)
    : "required";
  if (exitAt) errors.exit_datetime = exitAt;
  return errors;
}

export function canSubmit<T>(errors: FieldErrors<T>): boolean {
  return Object.keys(errors).length === 0;
}
