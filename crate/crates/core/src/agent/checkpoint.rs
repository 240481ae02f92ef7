//! `td3-v1` agent container.
//!
//! ```text
//! str  "td3-v1"
//! str  scalar tag ("f64" | "f32")
//! str  Td3Config as TOML
//! u64  state width
//! u32  action width, then f64 low bounds, f64 high bounds
//! u64  critic update count, actor update count
//! f64  OU state (one per action component)
//! 6 x  length-prefixed ckpt-v1 network blobs, in order:
//!      actor, actor target, critic 1, critic 2, critic 1 target, critic 2 target
//! ```

use std::path::Path;

use super::config::Td3Config;
use super::td3::Td3Agent;
use crate::codec::{Decoder, Encoder};
use crate::error::{check_len, Error, Result};
use crate::nncore::DenseNet;
use crate::scalar::Scalar;
use crate::space::ActionBox;

pub const AGENT_CHECKPOINT_TAG: &str = "td3-v1";

fn net_blob<T: Scalar>(e: &mut Encoder, net: &DenseNet<T>) {
    e.bytes(&net.to_bytes());
}

fn read_net<T: Scalar>(d: &mut Decoder) -> Result<DenseNet<T>> {
    DenseNet::from_bytes(d.bytes()?)
}

impl<T: Scalar> Td3Agent<T> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut e = Encoder::new();
        e.str(AGENT_CHECKPOINT_TAG);
        e.str(T::DTYPE);
        e.str(&toml::to_string(&self.config).expect("Td3Config serializes"));
        e.u64(self.state_width as u64);
        e.u32(self.action_box.width() as u32);
        e.f64s(self.action_box.low().iter().map(|v| v.as_f64()));
        e.f64s(self.action_box.high().iter().map(|v| v.as_f64()));
        e.u64(self.critic_updates);
        e.u64(self.actor_updates);
        e.f64s(self.ou.state.iter().map(|v| v.as_f64()));
        for net in [
            &self.actor,
            &self.actor_target,
            &self.critic1,
            &self.critic2,
            &self.critic1_target,
            &self.critic2_target,
        ] {
            net_blob(&mut e, net);
        }
        e.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut d = Decoder::new(bytes);
        d.expect_tag(AGENT_CHECKPOINT_TAG)?;
        let dtype = d.str()?;
        if dtype != T::DTYPE {
            return Err(Error::Checkpoint(format!(
                "scalar type mismatch: file holds {dtype}, loading as {}",
                T::DTYPE
            )));
        }
        let config: Td3Config = toml::from_str(d.str()?)
            .map_err(|e| Error::Checkpoint(format!("config echo: {e}")))?;
        let state_width = d.u64()? as usize;
        let action_width = d.u32()? as usize;
        if action_width == 0 || action_width > 1 << 16 {
            return Err(Error::Checkpoint(format!("implausible action width {action_width}")));
        }
        let low = d.f64s(action_width)?.into_iter().map(T::of).collect();
        let high = d.f64s(action_width)?.into_iter().map(T::of).collect();
        let action_box = ActionBox::new(low, high).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let critic_updates = d.u64()?;
        let actor_updates = d.u64()?;
        let ou_state: Vec<T> = d.f64s(action_width)?.into_iter().map(T::of).collect();
        let actor = read_net(&mut d)?;
        let actor_target = read_net(&mut d)?;
        let critic1 = read_net(&mut d)?;
        let critic2 = read_net(&mut d)?;
        let critic1_target = read_net(&mut d)?;
        let critic2_target = read_net(&mut d)?;
        d.finish()?;

        let mut agent = Td3Agent::from_networks(config, action_box, actor, critic1, critic2)
            .map_err(|e| Error::Checkpoint(format!("inconsistent agent payload: {e}")))?;
        check_len("checkpoint state width", state_width, agent.state_width)
            .map_err(|e| Error::Checkpoint(e.to_string()))?;
        for (target, online) in [
            (&actor_target, &agent.actor),
            (&critic1_target, &agent.critic1),
            (&critic2_target, &agent.critic2),
        ] {
            if !target.same_shape(online) {
                return Err(Error::Checkpoint("target network shape differs from its source".into()));
            }
        }
        if actor_updates != critic_updates / agent.config.eta {
            return Err(Error::Checkpoint(format!(
                "update counters inconsistent with eta={}: {critic_updates} critic, {actor_updates} actor",
                agent.config.eta
            )));
        }
        agent.actor_target = actor_target;
        agent.critic1_target = critic1_target;
        agent.critic2_target = critic2_target;
        agent.critic_updates = critic_updates;
        agent.actor_updates = actor_updates;
        agent.ou.state = ou_state;
        Ok(agent)
    }

    pub fn save_checkpoint(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}
