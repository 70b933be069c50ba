// Wire protocol spoken with the session gateway: one JSON object per
// websocket text frame, client messages keyed by "op", server events
// by "ev". Timestamps are session-clock milliseconds.

export type Task = 'listening' | 'interview';

export interface StartMsg {
  op: 'start';
  task: Task;
}

export interface VadMsg {
  op: 'vad';
  on: boolean;
  t: number;
}

export interface WordMsg {
  op: 'word';
  surface: string;
  pos: string;
  t: number;
  t_end: number;
}

export interface BehaviorMsg {
  op: 'behavior';
  kind: 'laugh' | 'nod' | 'gaze_contact' | 'user_backchannel';
  t: number;
}

export interface EndMsg {
  op: 'end';
}

export type ClientMsg = StartMsg | VadMsg | WordMsg | BehaviorMsg | EndMsg;

export interface BackchannelEvent {
  ev: 'backchannel';
  form: string;
  text: string;
  t: number;
}

export interface ResponseEvent {
  ev: 'response';
  kind: string;
  text: string;
  t: number;
}

export interface QuestionEvent {
  ev: 'question';
  text: string;
  t: number;
}

export interface TurnStateEvent {
  ev: 'turn_state';
  state: string;
  t: number;
}

export interface EngagementEvent {
  ev: 'engagement';
  score: number;
  t: number;
}

export interface ErrorEvent {
  ev: 'error';
  code: string;
  msg: string;
}

export type ServerEvent =
  | BackchannelEvent
  | ResponseEvent
  | QuestionEvent
  | TurnStateEvent
  | EngagementEvent
  | ErrorEvent;
