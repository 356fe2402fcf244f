// Wire types for the smellhunter gateway. Field names mirror the JSON
// bodies exactly, so responses can be used without remapping.

export type Severity = "low" | "medium" | "high" | "critical";

export type Stage =
    | "requested"
    | "validated"
    | "interpreted"
    | "persisted"
    | "failed";

/** Body of a 202 from POST /analyses. */
export interface UploadAccepted {
    correlation_id: string;
    accepted_at: string;
}

/** One entry of the `errors` array in a 400 from POST /analyses. */
export interface UploadError {
    part: string;
    message: string;
    row?: number;
    column?: number;
    key?: string;
}

export interface Diagnostic {
    source: string;
    detail: string;
    position: string | null;
}

export interface StatusDetection {
    entity_id: string;
    smell_name: string;
    severity: Severity;
}

/** Body of GET /analyses/{id}. */
export interface AnalysisStatus {
    correlation_id: string;
    stage: Stage;
    requested_at: string;
    updated_at: string;
    diagnostics: Diagnostic[] | null;
    detections: StatusDetection[] | null;
    annotations: string[];
}

/** One stored detection as returned by GET /detections. */
export interface DetectionRecord {
    record_id: string;
    correlation_id: string;
    smell_name: string;
    severity: Severity;
    entity_id: string;
    detected_at: string;
    user_id: string;
    org_id: string;
    project_id: string;
    file_path: string;
    language: string;
    latitude: number | null;
    longitude: number | null;
}

/** One run as returned by GET /executions. */
export interface ExecutionRecord {
    correlation_id: string;
    script_name: string;
    project_id: string;
    executed_at: string;
    status: "completed" | "failed";
    detection_count: number;
    smell_detected: boolean;
}

/** Paginated listing envelope shared by /detections and /executions. */
export interface Page<T> {
    total: number;
    offset: number;
    limit: number;
    items: T[];
}

/** GET /detections/histogram: smell name to matching record count. */
export type Histogram = Record<string, number>;
